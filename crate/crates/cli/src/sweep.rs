//! The four table generators.

use anyhow::{bail, Result};
use mqnmr::coherence::{closed_form_chain, closed_form_pair, extract_spectrum, regime_check};
use mqnmr::entanglement::{concurrence_at, concurrence_closed_form, entanglement_fluctuation, onset_temperature};
use mqnmr::spin::equilibrium_polarization;
use mqnmr::{ExperimentParams, RelaxationTime, SpinSystem};
use rayon::prelude::*;

use crate::config::{GridVar, Mode, Point, SweepConfig};
use crate::table::{Cell, Table};

/// Inverse temperature of the chain oracle, deep in the linear-response regime.
pub const CHAIN_ORACLE_BETA: f64 = 1e-6;

pub fn run(cfg: &SweepConfig) -> Result<Table> {
    match cfg.mode {
        Mode::Pair => run_pair_sweep(cfg),
        Mode::Chain => run_chain_sweep(cfg),
        Mode::Entanglement => run_entanglement(cfg),
        Mode::Figure1 => run_figure1(cfg),
    }
}

fn params(p: &Point) -> Result<ExperimentParams> {
    Ok(ExperimentParams::new(p.coupling_d, p.tau, p.t_mq, p.beta)?)
}

fn t_mq_cell(t: RelaxationTime) -> Cell {
    match t {
        RelaxationTime::Infinite => Cell::Text("inf"),
        RelaxationTime::Finite(v) => Cell::Num(v),
    }
}

fn point_cells(p: &Point, with_beta: bool) -> Vec<Cell> {
    let mut cells = Vec::with_capacity(5);
    if with_beta {
        cells.push(p.beta.into());
    }
    cells.extend([p.tau.into(), p.d_tau().into(), t_mq_cell(p.t_mq), p.relax_ratio().into()]);
    cells
}

/// Computes rows concurrently and assembles them in grid order.
fn build<F>(cfg: &SweepConfig, columns: Vec<&'static str>, row: F) -> Result<Table>
where
    F: Fn(&Point) -> Result<Vec<Cell>> + Sync,
{
    let points = cfg.points()?;
    warn_regime(cfg, &points);
    let rows = points.par_iter().map(&row).collect::<Result<Vec<_>>>()?;
    let mut table = Table::new(columns);
    table.rows = rows;
    Ok(table)
}

/// One warning for the grid point furthest from `D·T_MQ ≥ 10`.
fn warn_regime(cfg: &SweepConfig, points: &[Point]) {
    let worst = points
        .iter()
        .map(|p| regime_check(p.coupling_d, p.t_mq))
        .min_by(|a, b| a.d_tmq.total_cmp(&b.d_tmq));
    if let Some(diag) = worst {
        let ok = match cfg.mode {
            Mode::Chain => diag.chain_valid() || diag.d_tmq.is_infinite(),
            _ => diag.pair_valid(),
        };
        if !ok {
            log::warn!("validity regime at the worst grid point: {diag}");
        }
    }
}

pub fn run_pair_sweep(cfg: &SweepConfig) -> Result<Table> {
    let columns = vec![
        "beta", "tau", "d_tau", "t_mq", "x",
        "J0_closed", "Jp2_closed", "Jm2_closed",
        "J0_pipeline", "Jp2_pipeline", "Jm2_pipeline",
        "discrepancy",
    ];
    let sys = SpinSystem::pair();
    build(cfg, columns, |p| {
        let params = params(p)?;
        let exact = closed_form_pair(&params);
        let numeric = extract_spectrum(&sys, &params, 2)?;
        let mut cells = point_cells(p, true);
        let orders = [0, 2, -2];
        cells.extend(orders.map(|o| Cell::Num(exact.get(o))));
        cells.extend(orders.map(|o| Cell::Num(numeric.get(o))));
        let disc = orders
            .iter()
            .map(|&o| (exact.get(o) - numeric.get(o)).abs())
            .fold(0.0, f64::max);
        cells.push(disc.into());
        Ok(cells)
    })
}

pub fn run_chain_sweep(cfg: &SweepConfig) -> Result<Table> {
    let Some(n) = cfg.n_spins else {
        bail!("chain-sweep needs --n-spins");
    };
    if cfg.grids.iter().any(|g| g.var == GridVar::Beta) {
        bail!("the chain intensities do not depend on beta; sweep x, dtau, tau or t-mq instead");
    }
    let mut columns = vec!["tau", "d_tau", "t_mq", "x", "J0", "Jpm2", "sum_rule_residual"];
    if cfg.oracle {
        columns.extend(["J0_pipeline", "Jpm2_pipeline", "discrepancy"]);
    }
    let sys = SpinSystem::chain(n)?;
    let norm = equilibrium_polarization(&sys, CHAIN_ORACLE_BETA);
    build(cfg, columns, |p| {
        let params = params(p)?;
        let exact = closed_form_chain(n, &params)?;
        let (j0, jpm2) = (exact.get(0), exact.double_quantum());
        let residual = j0 + jpm2 - p.t_mq.decay(2.0 * p.tau);
        let mut cells = point_cells(p, false);
        cells.extend([j0.into(), jpm2.into(), residual.into()]);
        if cfg.oracle {
            let hot = ExperimentParams { beta: CHAIN_ORACLE_BETA, ..params };
            let numeric = extract_spectrum(&sys, &hot, n)?.normalized(norm);
            let (n0, n2) = (numeric.get(0), numeric.double_quantum());
            let disc = (n0 - j0).abs().max((n2 - jpm2).abs());
            cells.extend([n0.into(), n2.into(), disc.into()]);
        }
        Ok(cells)
    })
}

pub fn run_entanglement(cfg: &SweepConfig) -> Result<Table> {
    let columns = vec![
        "beta", "tau", "d_tau", "t_mq", "x",
        "C_closed", "C_numeric", "delta_E", "T_E", "discrepancy",
    ];
    build(cfg, columns, |p| {
        let params = params(p)?;
        let x = p.relax_ratio();
        let closed = concurrence_closed_form(p.beta, p.d_tau(), x);
        let numeric = concurrence_at(&params)?;
        let t_e = cfg.omega0.and_then(|w| onset_temperature(w, x));
        let mut cells = point_cells(p, true);
        cells.extend([
            closed.into(),
            numeric.concurrence.into(),
            entanglement_fluctuation(closed)?.into(),
            t_e.into(),
            (closed - numeric.concurrence).abs().into(),
        ]);
        Ok(cells)
    })
}

/// Double-quantum intensity, concurrence and its fluctuation against `x = τ/T_MQ`.
pub fn run_figure1(cfg: &SweepConfig) -> Result<Table> {
    let columns = vec!["x", "Jpm2", "C", "delta_E"];
    build(cfg, columns, |p| {
        let params = params(p)?;
        let jpm2 = closed_form_pair(&params).double_quantum();
        let c = concurrence_closed_form(p.beta, p.d_tau(), p.relax_ratio());
        Ok(vec![
            p.relax_ratio().into(),
            jpm2.into(),
            c.into(),
            entanglement_fluctuation(c)?.into(),
        ])
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::SweepArgs;

    fn cfg(mode: Mode, args: SweepArgs) -> SweepConfig {
        SweepConfig::resolve(mode, &args).unwrap()
    }

    #[test]
    fn pair_sweep_example() {
        let t = run(&cfg(
            Mode::Pair,
            SweepArgs {
                grid: vec!["x:0:3:4".into()],
                ..Default::default()
            },
        ))
        .unwrap();
        assert_eq!(t.rows.len(), 4);
        let jp = t.column("Jp2_closed").unwrap();
        let jm = t.column("Jm2_closed").unwrap();
        assert!((jp[0] + jm[0] - 0.99505).abs() < 1e-5);
        assert!(t.max_discrepancy().unwrap() <= 1e-10);
        assert_eq!(t.rows[0][t.column_index("t_mq").unwrap()], Cell::Text("inf"));
    }

    #[test]
    fn pair_at_zero_tau() {
        let t = run(&cfg(
            Mode::Pair,
            SweepArgs {
                tau: Some(0.0),
                ..Default::default()
            },
        ))
        .unwrap();
        assert_eq!(t.rows.len(), 1);
        assert!((t.column("J0_closed").unwrap()[0] - 3f64.tanh()).abs() < 1e-15);
        assert!(t.max_discrepancy().unwrap() <= 1e-10);
    }

    #[test]
    fn chain_sweep_rows() {
        let t = run(&cfg(
            Mode::Chain,
            SweepArgs {
                n_spins: Some(4),
                oracle: true,
                grid: vec!["dtau:0:6:7".into()],
                t_mq: Some("0.01".into()),
                ..Default::default()
            },
        ))
        .unwrap();
        assert_eq!(t.column("J0").unwrap()[0], 1.0);
        assert!(t.column("sum_rule_residual").unwrap().iter().all(|r| r.abs() <= 1e-12));
        assert!(t.max_discrepancy().unwrap() < 1e-8);
    }

    #[test]
    fn chain_rejects_beta_grid() {
        let c = cfg(
            Mode::Chain,
            SweepArgs {
                n_spins: Some(3),
                grid: vec!["beta:1:2:2".into()],
                ..Default::default()
            },
        );
        assert!(run(&c).is_err());
    }

    #[test]
    fn entanglement_onset_column() {
        let ln3 = 3f64.ln();
        let t = run(&cfg(
            Mode::Entanglement,
            SweepArgs {
                omega0: Some(2.0 * std::f64::consts::PI * 5e8),
                grid: vec![format!("x:0:{ln3}:2")],
                ..Default::default()
            },
        ))
        .unwrap();
        let i = t.column_index("T_E").unwrap();
        match t.rows[0][i] {
            Cell::Num(v) => assert!((v - 0.0272).abs() < 1e-4),
            ref other => panic!("{other:?}"),
        }
        assert_eq!(t.rows[1][i], Cell::Empty);
        assert!(t.max_discrepancy().unwrap() <= 1e-9);
    }

    #[test]
    fn figure1_left_edge() {
        let t = run(&cfg(Mode::Figure1, SweepArgs::default())).unwrap();
        assert_eq!(t.rows.len(), 301);
        assert!((t.column("Jpm2").unwrap()[0] - 3f64.tanh()).abs() < 1e-12);
        let c0 = t.column("C").unwrap()[0];
        assert!((c0 - (6f64.sinh() - 1.0) / (2.0 * 3f64.cosh().powi(2))).abs() < 1e-12);
        assert_eq!(*t.column("C").unwrap().last().unwrap(), 0.0);
        assert_eq!(*t.column("delta_E").unwrap().last().unwrap(), 0.0);
        assert_eq!(t.max_discrepancy(), None);
    }
}
