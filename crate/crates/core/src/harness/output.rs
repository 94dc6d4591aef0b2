//! Output files: `gaps.csv`, `fit.csv`, the config echo and gnuplot-ready `plotdata.dat`.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

use super::config::ExperimentConfig;
use super::experiment::{ExperimentOutcome, GapTable, RateFits, SeriesFit};

pub const GAPS_FILE: &str = "gaps.csv";
pub const FIT_FILE: &str = "fit.csv";
pub const CONFIG_ECHO_FILE: &str = "config.ini";
pub const PLOT_FILE: &str = "plotdata.dat";

pub const GAPS_HEADER: &str = "n,gap_avg_mean,gap_avg_se,gap_last_mean,gap_last_se,R";
pub const FIT_HEADER: &str = "series,slope,intercept,r2,n_min,n_max";

pub fn gaps_csv(table: &GapTable, failure: Option<&(usize, String)>) -> String {
    let mut s = format!("#schema=1\n{GAPS_HEADER}\n");
    for r in &table.rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{}",
            r.n, r.gap_avg_mean, r.gap_avg_se, r.gap_last_mean, r.gap_last_se, r.replications
        );
    }
    if let Some((rep, msg)) = failure {
        let _ = writeln!(s, "#failure,replication {rep},{}", msg.replace(['\n', ','], " "));
    }
    s
}

fn fit_row(s: &mut String, series: &str, fit: &SeriesFit) {
    match fit {
        Ok(f) => {
            let _ = writeln!(
                s,
                "{series},{},{},{},{},{}",
                f.slope,
                f.intercept,
                f.r2,
                f.window.0.round(),
                f.window.1.round()
            );
        }
        Err(_) => {
            let _ = writeln!(s, "{series},nan,nan,nan,nan,nan");
        }
    }
}

pub fn fit_csv(fits: &RateFits) -> String {
    let mut s = format!("{FIT_HEADER}\n");
    fit_row(&mut s, "averaged", &fits.averaged);
    fit_row(&mut s, "last", &fits.last);
    s
}

/// Two gnuplot data blocks (`index 0` averaged, `index 1` last) of `log10 n  log10 gap`.
/// Non-positive gaps are skipped.
pub fn plot_data(table: &GapTable) -> String {
    let mut s = String::new();
    for (i, (name, pick)) in [
        ("averaged", (|r: &super::experiment::GapRow| r.gap_avg_mean) as fn(&_) -> f64),
        ("last", |r| r.gap_last_mean),
    ]
    .into_iter()
    .enumerate()
    {
        if i > 0 {
            s.push_str("\n\n");
        }
        let _ = writeln!(s, "# {name}\n# log10_n log10_gap");
        for r in &table.rows {
            let g = pick(r);
            if g > 0.0 {
                let _ = writeln!(s, "{} {}", (r.n as f64).log10(), g.log10());
            }
        }
    }
    s
}

fn write(dir: &Path, name: &str, contents: &str) -> Result<PathBuf> {
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|source| Error::Io { path: path.clone(), source })?;
    Ok(path)
}

/// Writes all four files into `dir`, creating it if needed. Returns the paths written.
pub fn emit_outputs(outcome: &ExperimentOutcome, cfg: &ExperimentConfig, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|source| Error::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    Ok(vec![
        write(dir, GAPS_FILE, &gaps_csv(&outcome.table, outcome.failure.as_ref()))?,
        write(dir, FIT_FILE, &fit_csv(&outcome.fits))?,
        write(dir, CONFIG_ECHO_FILE, &cfg.echo())?,
        write(dir, PLOT_FILE, &plot_data(&outcome.table))?,
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::experiment::GapRow;

    fn outcome(rows: Vec<GapRow>) -> ExperimentOutcome {
        ExperimentOutcome {
            table: GapTable { rows },
            fits: RateFits {
                averaged: Err("none".into()),
                last: Err("none".into()),
            },
            failure: None,
        }
    }

    #[test]
    fn empty_table_is_header_only() {
        assert_eq!(gaps_csv(&GapTable::default(), None), format!("#schema=1\n{GAPS_HEADER}\n"));
    }

    #[test]
    fn failure_marker_row() {
        let s = gaps_csv(&GapTable::default(), Some(&(3, "iteration 5: bad, worse".into())));
        assert!(s.ends_with("#failure,replication 3,iteration 5: bad  worse\n"));
    }

    #[test]
    fn plot_blocks_skip_non_positive_gaps() {
        let row = |n, a, l| GapRow {
            n,
            gap_avg_mean: a,
            gap_avg_se: 0.0,
            gap_last_mean: l,
            gap_last_se: 0.0,
            replications: 1,
        };
        let p = plot_data(&outcome(vec![row(10, 0.1, -1.0), row(100, 0.01, 0.1)]).table);
        assert_eq!(p, "# averaged\n# log10_n log10_gap\n1 -1\n2 -2\n\n\n# last\n# log10_n log10_gap\n2 -1\n");
    }

    #[test]
    fn writes_four_files() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = crate::harness::parse_config(
            "[problem]\nname = simplex_risk\ndim = 3\n[algorithm]\nc = 1\ntheta = 0.7\niterations = 5\n",
        )
        .unwrap();
        let paths = emit_outputs(&outcome(vec![]), &cfg, &dir.path().join("nested")).unwrap();
        assert_eq!(paths.len(), 4);
        assert!(paths.iter().all(|p| p.exists()));
        assert_eq!(fs::read_to_string(&paths[1]).unwrap(), format!("{FIT_HEADER}\naveraged,nan,nan,nan,nan,nan\nlast,nan,nan,nan,nan,nan\n"));
    }
}
