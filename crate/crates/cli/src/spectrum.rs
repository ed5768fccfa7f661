use pseudoherm::casimir::{mode_eigen, spectral_solve};
use pseudoherm::symmetry::Regime;

use crate::config::RunConfig;
use crate::output::{fmt_num, Cell, Table};
use crate::{guard_ep, header, level_energy, CliError, Command};

/// Eigenvalues `epsilon_n`, `n < dim`, with the regime on every row.
pub fn run(cfg: &RunConfig) -> Result<Table, CliError> {
    let p = cfg.params()?;
    let at_ep = guard_ep(cfg, &p)?;
    let mut t = header(Command::Spectrum, cfg, &p);
    t.columns = ["n", "re_eps", "im_eps", "regime"].map(String::from).to_vec();

    let (values, regime) = if at_ep {
        let mode = mode_eigen(&p);
        t.meta("mode_overlap", fmt_num(mode.overlap));
        ((0..cfg.dim).map(|n| level_energy(&p, n)).collect::<Vec<_>>(), Regime::ExceptionalPoint)
    } else {
        let sr = spectral_solve(&p, cfg.dim)?;
        t.meta("diagonal_residual", fmt_num(sr.diagonal_residual));
        match &sr.dense {
            Some(d) => {
                t.meta("dense_levels", d.levels.to_string())
                    .meta("dense_max_abs_error", fmt_num(d.max_abs_error));
            }
            None => {
                t.meta("dense_levels", "0");
            }
        }
        (sr.eigenvalues.clone(), sr.regime)
    };
    for (n, e) in values.iter().enumerate() {
        t.push(vec![Cell::from(n), Cell::from(e.re), Cell::from(e.im), Cell::from(regime.as_str())]);
    }
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(text: &str) -> RunConfig {
        RunConfig::parse(text).unwrap()
    }

    fn values(t: &Table) -> Vec<(f64, f64)> {
        t.rows
            .iter()
            .map(|r| match (&r[1], &r[2]) {
                (Cell::Num(a), Cell::Num(b)) => (*a, *b),
                _ => panic!("numeric columns expected"),
            })
            .collect()
    }

    #[test]
    fn unbroken_levels_are_equally_spaced() {
        let t = run(&cfg("delta=1\ng=0.25\nalpha=1\nbeta=1\ndim=32")).unwrap();
        assert_eq!(t.rows.len(), 32);
        let w = 0.75f64.sqrt();
        for (n, (re, im)) in values(&t).into_iter().enumerate() {
            assert!((re - w * (n as f64 + 0.5)).abs() < 1e-10);
            assert!(im.abs() < 1e-12);
        }
        assert_eq!(t.rows[0][3], Cell::from("unbroken"));
    }

    #[test]
    fn broken_levels_are_imaginary() {
        let t = run(&cfg("delta=0.5\ng=0.5\nalpha=1\nbeta=1\ndim=16")).unwrap();
        for (re, im) in values(&t) {
            assert!(re.abs() < 1e-12);
            assert!(im.abs() > 0.1);
        }
        assert_eq!(t.rows[0][3], Cell::from("broken"));
    }

    #[test]
    fn free_oscillator() {
        let t = run(&cfg("delta=1.5\ng=0\ndim=8")).unwrap();
        for (n, (re, _)) in values(&t).into_iter().enumerate() {
            assert!((re - 1.5 * (n as f64 + 0.5)).abs() < 1e-12);
        }
    }

    #[test]
    fn exceptional_point_needs_permission() {
        let text = "delta=1\ng=0.25\nalpha=1\nbeta=4\ndim=8";
        assert!(matches!(run(&cfg(text)), Err(CliError::Singular(_))));
        let t = run(&cfg(&format!("{text}\nallow_ep=true"))).unwrap();
        assert_eq!(t.rows[0][3], Cell::from("exceptional_point"));
        assert!(values(&t).iter().all(|(re, im)| re.abs() < 1e-12 && im.abs() < 1e-12));
    }
}
