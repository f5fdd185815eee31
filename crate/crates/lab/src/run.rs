//! The `solve`, `analyze` and `report` pipelines.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use degenlab_core::analysis::{self, ModulusExponent};
use degenlab_core::solver::{self, Flux};
use degenlab_core::{
    DualSample, GDeltaMap, GridField, GridSpec, IntegrandSpec, RegularizedIntegrand, ScalarField,
    SolverConfig,
};
use rayon::prelude::*;

use crate::checkpoint;
use crate::config::{CheckpointFormat, ExperimentConfig, KPolicy};
use crate::expr::Expr;
use crate::report::{
    self, ConstantsLedger, EnergyRow, EpsConvRow, EpsConvSummary, ExcessRow, ExperimentReport, GDeltaSummary,
    KRecord, LevelSummary, ModulusRow, RegimeRow, Summary,
};
use crate::{LabError, Result};

/// A validated config with its objects built.
pub struct Experiment {
    pub config: ExperimentConfig,
    pub integrand: IntegrandSpec,
    pub spec: GridSpec,
    pub steps: usize,
    pub data: Arc<dyn ScalarField>,
    pub source: Expr,
    pub solver: SolverConfig,
}

impl Experiment {
    pub fn new(config: ExperimentConfig) -> Result<Self> {
        config.validate()?;
        Ok(Self {
            integrand: config.integrand()?,
            spec: config.grid_spec()?,
            steps: config.steps()?,
            data: config.data_field()?,
            source: config.source_expr()?,
            solver: config.solver.to_core(),
            config,
        })
    }

    pub fn regularized(&self, k: f64, epsilon: f64) -> Result<RegularizedIntegrand> {
        Ok(RegularizedIntegrand::build(self.integrand.clone(), k, epsilon)?)
    }
}

/// Largest nodal gradient norm over all levels.
pub fn gradient_sup(field: &GridField) -> f64 {
    let spec = field.spec();
    let mut m: f64 = 0.0;
    for k in 0..field.level_count() {
        for j in 0..spec.ny() {
            for i in 0..spec.nx() {
                m = m.max(field.node_gradient(k, i, j).norm());
            }
        }
    }
    m
}

/// Resolves `K` from the config: fixed, or a coarse `ε = 1` pre-solve whose
/// gradient sup is inflated by the configured factor.
pub fn resolve_k(exp: &Experiment) -> Result<KRecord> {
    match exp.config.k {
        KPolicy::Fixed { value } => Ok(KRecord {
            value,
            policy: "fixed".into(),
            measured: None,
        }),
        KPolicy::Bootstrap { factor, coarse_nodes } => {
            let coarse = GridSpec::new(coarse_nodes, coarse_nodes, exp.spec.x_range(), exp.spec.y_range())?;
            let dt = exp.config.time.dt;
            let mut data_levels = Vec::with_capacity(exp.steps + 1);
            for k in 0..=exp.steps {
                data_levels.push(coarse.sample(exp.data.as_ref(), k as f64 * dt));
            }
            let data_sup = gradient_sup(&GridField::from_levels(coarse, 0.0, dt, data_levels)?);
            let reg = exp.regularized(factor * data_sup, 1.0)?;
            let mut field = GridField::new(coarse, 0.0, dt, exp.data.clone())?;
            for step in 1..=exp.steps {
                solver::advance(&mut field, &reg, &exp.source, &exp.solver)
                    .map_err(|source| LabError::Solve { epsilon: 1.0, step, source })?;
            }
            let measured = gradient_sup(&field).max(data_sup);
            Ok(KRecord {
                value: factor * measured,
                policy: "bootstrap".into(),
                measured: Some(measured),
            })
        }
    }
}

/// One solved ε level.
pub struct Solved {
    pub epsilon: f64,
    pub reg: RegularizedIntegrand,
    pub field: GridField,
    pub energy: Vec<EnergyRow>,
}

pub fn solve_level(exp: &Experiment, k: f64, epsilon: f64) -> Result<Solved> {
    let reg = exp.regularized(k, epsilon)?;
    let mut field = GridField::new(exp.spec, 0.0, exp.config.time.dt, exp.data.clone())?;
    let mut energy = Vec::with_capacity(exp.steps + 1);
    energy.push(EnergyRow {
        step: 0,
        t: 0.0,
        energy: solver::discrete_energy(&exp.spec, &reg, field.last(), 0.0),
        sup_norm: field.sup_norm(0),
        newton_iters: 0,
    });
    for step in 1..=exp.steps {
        let st = solver::advance(&mut field, &reg, &exp.source, &exp.solver)
            .map_err(|source| LabError::Solve { epsilon, step, source })?;
        energy.push(EnergyRow {
            step: st.step,
            t: st.t,
            energy: st.energy,
            sup_norm: st.sup_norm,
            newton_iters: st.newton_iters,
        });
    }
    Ok(Solved {
        epsilon,
        reg,
        field,
        energy,
    })
}

struct LevelTables {
    excess: Vec<ExcessRow>,
    regime: Vec<RegimeRow>,
    residual: f64,
}

fn analyze_level(exp: &Experiment, solved: &Solved, dual: &DualSample) -> Result<LevelTables> {
    let plan = &exp.config.analysis;
    let cylinders = exp.config.cylinders()?;
    let mut excess = Vec::with_capacity(cylinders.len());
    let mut regime = Vec::new();
    for cyl in &cylinders {
        excess.push(ExcessRow {
            x0: cyl.center.x,
            y0: cyl.center.y,
            t0: cyl.t0,
            rho: cyl.radius,
            excess: analysis::excess(&solved.field, cyl)?,
        });
    }
    for &delta in &exp.config.deltas {
        for (id, cyl) in cylinders.iter().enumerate() {
            let r = analysis::classify_regime(&solved.field, cyl, delta, plan.mu, plan.nu, dual)?;
            let witness_angle = match r {
                analysis::Regime::NonDegenerate { angle, .. } => Some(angle),
                analysis::Regime::Degenerate { .. } => None,
            };
            regime.push(RegimeRow {
                cylinder_id: id,
                delta,
                mu: plan.mu,
                nu: plan.nu,
                label: r.label().into(),
                witness_angle,
            });
        }
    }
    let residual = solver::weak_residual(&solved.field, &solved.reg, &exp.source, plan.test_radius, Flux::Regularized)?;
    Ok(LevelTables {
        excess,
        regime,
        residual: residual.value,
    })
}

fn modulus_rows(exp: &Experiment, solved: &Solved, delta: f64) -> Result<Vec<ModulusRow>> {
    let map = GDeltaMap::new(exp.integrand.body().clone(), delta)?;
    let fit = analysis::continuity_modulus(&solved.field, &map, &exp.config.region(), &exp.config.lags())?;
    let (exponent_fit, r2) = match fit.fit {
        ModulusExponent::Exact => ("exact".to_string(), None),
        ModulusExponent::Fitted { exponent, r2, .. } => (exponent.to_string(), Some(r2)),
    };
    Ok(fit
        .lags
        .iter()
        .zip(&fit.osc)
        .map(|(&lag, &osc)| ModulusRow {
            delta,
            epsilon: solved.epsilon,
            lag,
            osc,
            exponent_fit: exponent_fit.clone(),
            r2,
        })
        .collect())
}

fn pool(threads: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| LabError::Pool(e.to_string()))
}

/// Writes all analysis tables and the summary for solved levels. `files`
/// already holds the hashes of energy tables and checkpoints.
fn write_analysis(
    exp: &Experiment,
    root: &Path,
    k: KRecord,
    solved: &[Solved],
    mut files: BTreeMap<String, String>,
) -> Result<Summary> {
    let cfg = &exp.config;
    let dual = exp.integrand.body().sample_dual_boundary(cfg.analysis.dual_samples)?;
    let tables: Vec<LevelTables> = solved
        .par_iter()
        .map(|s| analyze_level(exp, s, &dual))
        .collect::<Result<_>>()?;
    let data_sup = cfg.data_sup()?;

    let mut levels = Vec::with_capacity(solved.len());
    for (s, t) in solved.iter().zip(&tables) {
        let dir = report::eps_dir(s.epsilon);
        report::write_tracked(
            root,
            &format!("{dir}/excess.csv"),
            &report::csv_bytes(&t.excess, &report::EXCESS_HEADER)?,
            &mut files,
        )?;
        report::write_tracked(
            root,
            &format!("{dir}/regime.csv"),
            &report::csv_bytes(&t.regime, &report::REGIME_HEADER)?,
            &mut files,
        )?;
        levels.push(LevelSummary {
            epsilon: s.epsilon,
            constants: ConstantsLedger::from(s.reg.constants()),
            steps: s.field.steps(),
            data_sup,
            final_sup_norm: s.field.sup_norm(s.field.steps()),
            max_newton_iters: s.energy.iter().map(|r| r.newton_iters).max().unwrap_or(0),
            gradient_energy: analysis::gradient_energy(&s.field),
            weak_residual: t.residual,
        });
    }

    let jobs: Vec<(f64, usize)> = cfg
        .deltas
        .iter()
        .flat_map(|&d| (0..solved.len()).map(move |i| (d, i)))
        .collect();
    let modulus: Vec<Vec<ModulusRow>> = jobs
        .par_iter()
        .map(|&(d, i)| modulus_rows(exp, &solved[i], d))
        .collect::<Result<_>>()?;
    let modulus: Vec<ModulusRow> = modulus.into_iter().flatten().collect();
    report::write_tracked(
        root,
        "modulus.csv",
        &report::csv_bytes(&modulus, &report::MODULUS_HEADER)?,
        &mut files,
    )?;

    let mut epsconv = Vec::new();
    let mut g_delta = Vec::new();
    for &delta in &cfg.deltas {
        let map = GDeltaMap::new(exp.integrand.body().clone(), delta)?;
        g_delta.push(GDeltaSummary {
            delta,
            forward_bound: map.lipschitz_forward_bound(),
            inverse_bound: map.lipschitz_inverse_bound()?,
            collapse_bound: map.collapse_bound(),
        });
        if solved.len() < 3 {
            epsconv.push(EpsConvSummary {
                delta,
                reference_eps: None,
                monotone: None,
                violation: None,
            });
            continue;
        }
        let pairs: Vec<(f64, &GridField)> = solved.iter().map(|s| (s.epsilon, &s.field)).collect();
        let table = analysis::eps_convergence_table(&pairs, &map)?;
        let rows: Vec<EpsConvRow> = table
            .rows
            .iter()
            .map(|&(eps, d)| EpsConvRow {
                eps,
                l2_distance_to_ref: d,
            })
            .collect();
        report::write_tracked(
            root,
            &format!("{}/epsconv.csv", report::delta_dir(delta)),
            &report::csv_bytes(&rows, &report::EPSCONV_HEADER)?,
            &mut files,
        )?;
        epsconv.push(EpsConvSummary {
            delta,
            reference_eps: Some(table.reference_eps),
            monotone: Some(table.monotone),
            violation: table.violation,
        });
    }

    let summary = Summary {
        config_hash: cfg.hash(),
        seed: cfg.seed,
        dual_samples: cfg.analysis.dual_samples,
        k,
        levels,
        g_delta,
        epsconv,
        files,
    };
    report::write_summary(root, &summary)?;
    Ok(summary)
}

/// Solves every ε level, writes checkpoints and tables under the config's
/// output directory. `threads == 0` uses the rayon default.
pub fn run_solve(config: ExperimentConfig, threads: usize) -> Result<Summary> {
    let exp = Experiment::new(config)?;
    let root = exp.config.output.clone();
    std::fs::create_dir_all(&root).map_err(|e| LabError::io(&root, e))?;
    pool(threads)?.install(|| {
        let k = resolve_k(&exp)?;
        let solved: Vec<Solved> = exp
            .config
            .epsilons
            .par_iter()
            .map(|&eps| solve_level(&exp, k.value, eps))
            .collect::<Result<_>>()?;
        let mut files = BTreeMap::new();
        for s in &solved {
            let dir = report::eps_dir(s.epsilon);
            report::write_tracked(
                &root,
                &format!("{dir}/energy.csv"),
                &report::csv_bytes(&s.energy, &report::ENERGY_HEADER)?,
                &mut files,
            )?;
            let format = exp.config.checkpoint;
            if let Some(name) = checkpoint::file_name(format) {
                let bytes = match format {
                    CheckpointFormat::Binary => checkpoint::encode_binary(&s.field),
                    _ => checkpoint::encode_csv(&s.field)?,
                };
                report::write_tracked(&root, &format!("{dir}/{name}"), &bytes, &mut files)?;
            }
        }
        write_analysis(&exp, &root, k, &solved, files)
    })
}

/// Re-runs the analysis on checkpoints from a previous `solve`.
pub fn run_analyze(config: ExperimentConfig, threads: usize) -> Result<Summary> {
    let exp = Experiment::new(config)?;
    let root = exp.config.output.clone();
    let previous = report::read_summary(&root)?;
    let name = checkpoint::file_name(exp.config.checkpoint)
        .ok_or_else(|| LabError::config("checkpoint", "analyze needs checkpoints; format is `none`"))?;
    if previous.config_hash != exp.config.hash() {
        return Err(LabError::config(
            "",
            "config differs from the one that produced the checkpoints (hash mismatch)",
        ));
    }
    report::verify_hashes(&root, &previous)?;
    pool(threads)?.install(|| {
        let mut files = BTreeMap::new();
        let mut solved = Vec::with_capacity(exp.config.epsilons.len());
        for &eps in &exp.config.epsilons {
            let dir = report::eps_dir(eps);
            for rel in [format!("{dir}/energy.csv"), format!("{dir}/{name}")] {
                let hash = previous
                    .files
                    .get(&rel)
                    .ok_or_else(|| LabError::format(root.join(&rel), "missing from summary.json"))?;
                files.insert(rel, hash.clone());
            }
            solved.push(Solved {
                epsilon: eps,
                reg: exp.regularized(previous.k.value, eps)?,
                field: checkpoint::read(&root.join(&dir).join(name))?,
                energy: report::read_csv(&root.join(&dir).join("energy.csv"))?,
            });
        }
        write_analysis(&exp, &root, previous.k.clone(), &solved, files)
    })
}

/// Merges everything under `root` into `report.json`.
pub fn run_report(root: &Path) -> Result<ExperimentReport> {
    let merged = report::merge(root)?;
    let path = root.join("report.json");
    let text = serde_json::to_string_pretty(&merged)? + "\n";
    std::fs::write(&path, text).map_err(|e| LabError::io(&path, e))?;
    Ok(merged)
}
