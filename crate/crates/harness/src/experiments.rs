//! Experiment drivers: tradeoff regions, model comparison, TDMA baseline and
//! the (K, N) grid.

use std::time::Instant;

use serde::Serialize;
use wpbc::algorithms::{
    algorithm1_feasibility, check_solution, optimize_with, single_tone_snr_bound, CheckReport, FeasibilityResult,
};
use wpbc::conic::InteriorPoint;
use wpbc::{
    all_sinrs, db_to_linear, linear_to_db, mmse_combiners, z_dc_scalar, ChannelRealization, EhModel, Error,
    SystemConfig64, Waveform, WaveformSolution64,
};

use crate::error::Result;
use crate::spec::{
    Algorithm, CompareParams, Design, Experiment, GridParams, RegionParams, RunSpec, Scenario, TdmaParams,
    Variant,
};

/// Relative tolerance of the independent solution check.
pub const CHECK_TOL: f64 = 1e-6;

#[derive(Clone, Debug, Serialize)]
pub struct Solved {
    pub solution: WaveformSolution64,
    pub check: CheckReport,
}

#[derive(Clone, Debug, Serialize)]
pub enum Outcome {
    Infeasible,
    Solved(Box<Solved>),
    /// Feasible per Algorithm 1 but no rank-one waveform passed the checker.
    Rejected(String),
}

impl Outcome {
    pub fn solved(&self) -> Option<&Solved> {
        match self {
            Self::Solved(s) => Some(s),
            _ => None,
        }
    }

    fn method(&self) -> String {
        match self {
            Self::Infeasible => "infeasible".into(),
            Self::Solved(s) => s.solution.method.as_str().into(),
            Self::Rejected(_) => "rejected".into(),
        }
    }
}

/// Runs one optimizer on a feasible warm start and validates the result.
pub fn optimize(
    cfg: &SystemConfig64,
    ch: &ChannelRealization<f64>,
    warm: &FeasibilityResult<f64>,
    algorithm: Algorithm,
    design: Design,
) -> Result<Outcome> {
    if !warm.is_feasible() {
        return Ok(Outcome::Infeasible);
    }
    let opts = algorithm.options(design.into());
    match optimize_with(cfg, ch, warm, &opts, &InteriorPoint::default()) {
        Ok(solution) => {
            let check = check_solution(cfg, ch, &solution.waveform, &solution.combiners, CHECK_TOL);
            if check.passed() {
                Ok(Outcome::Solved(Box::new(Solved { solution, check })))
            } else {
                Ok(Outcome::Rejected(check.violations.join("; ")))
            }
        }
        Err(Error::Extraction(msg)) => Ok(Outcome::Rejected(msg)),
        Err(e) => Err(e.into()),
    }
}

/// `Z_DC` of `w` under the nonlinear metric on the forward channel.
pub fn nonlinear_score(cfg: &SystemConfig64, ch: &ChannelRealization<f64>, w: &Waveform<f64>) -> Result<f64> {
    Ok(z_dc_scalar(w, ch, &cfg.with_model(EhModel::Nonlinear4th))?.total)
}

/// Largest uniform target (linear) that can possibly be feasible.
pub fn max_snr_bound(cfg: &SystemConfig64, ch: &ChannelRealization<f64>) -> f64 {
    (0..cfg.n_tags)
        .map(|j| single_tone_snr_bound(cfg, ch, j))
        .fold(f64::INFINITY, f64::min)
}

#[derive(Clone, Debug, Serialize)]
pub struct TradeoffPoint {
    pub realization: usize,
    pub target_db: f64,
    pub target_linear: f64,
    pub delta_star: f64,
    /// `δ_min` per Algorithm-1 outer iteration.
    pub delta_trace: Vec<f64>,
    pub outcome: Outcome,
    pub seconds: f64,
}

impl TradeoffPoint {
    pub fn feasible(&self) -> bool {
        self.outcome.solved().is_some()
    }

    pub fn z_dc(&self) -> Option<f64> {
        self.outcome.solved().map(|s| s.solution.harvest.total)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Anchor {
    pub realization: usize,
    pub kind: &'static str,
    pub z_dc: Vec<f64>,
    pub total: f64,
    pub sinrs: Vec<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct RegionResult {
    pub points: Vec<TradeoffPoint>,
    pub anchors: Vec<Anchor>,
}

fn region_targets(p: &RegionParams, bound: f64) -> Vec<f64> {
    if !p.targets_db.is_empty() {
        return p.targets_db.clone();
    }
    let top = linear_to_db(bound);
    let mut out = Vec::new();
    let mut k = 0;
    loop {
        let t = -10.0 + k as f64 * p.step_db;
        if t > top {
            break;
        }
        out.push(t);
        k += 1;
    }
    out
}

/// Full-power single-tone waveform on the strongest backscatter tone of tag 0.
pub fn single_tone_waveform(cfg: &SystemConfig64, ch: &ChannelRealization<f64>) -> Waveform<f64> {
    let h = ch.h_diag(0);
    let best = (0..cfg.n_tones)
        .max_by(|&a, &b| h[a].norm_sqr().total_cmp(&h[b].norm_sqr()))
        .unwrap_or(0);
    let power = cfg.psd_limit.map_or(cfg.tx_power, |c| c.min(cfg.tx_power));
    let mut w = Waveform::zeros(cfg.n_tones);
    w.weights[best] = wpbc::Cplx::new((2.0 * power).sqrt(), 0.0);
    w
}

pub fn trace_region(scenario: &Scenario, p: &RegionParams) -> Result<RegionResult> {
    let (k, n) = (scenario.system.n_tags, scenario.system.n_tones);
    let mut points = Vec::new();
    let mut anchors = Vec::new();
    for r in 0..scenario.realizations() {
        let ch = scenario.channel(r, k, n)?;
        let base = scenario.system_for(k, n, r).with_model(p.model.into());

        let wpt = base.with_targets(0.0);
        let warm = algorithm1_feasibility(&wpt, &ch)?;
        if let Some(s) = optimize(&wpt, &ch, &warm, p.algorithm, p.design)?.solved() {
            anchors.push(Anchor {
                realization: r,
                kind: "wpt",
                z_dc: s.solution.harvest.per_tag.clone(),
                total: s.solution.harvest.total,
                sinrs: s.solution.sinrs.clone(),
            });
        }
        if k == 1 {
            let w = single_tone_waveform(&base, &ch);
            let g = mmse_combiners(&w, &ch, base.noise_var)?;
            let h = z_dc_scalar(&w, &ch, &base)?;
            anchors.push(Anchor {
                realization: r,
                kind: "max_snr",
                z_dc: h.per_tag,
                total: h.total,
                sinrs: all_sinrs(&w, &g, &ch, base.noise_var)?,
            });
        }

        for t in region_targets(p, max_snr_bound(&base, &ch)) {
            let start = Instant::now();
            let cfg = base.with_targets(db_to_linear(t));
            let warm = algorithm1_feasibility(&cfg, &ch)?;
            let outcome = optimize(&cfg, &ch, &warm, p.algorithm, p.design)?;
            points.push(TradeoffPoint {
                realization: r,
                target_db: t,
                target_linear: db_to_linear(t),
                delta_star: warm.delta_star,
                delta_trace: warm.delta_min_trace,
                outcome,
                seconds: start.elapsed().as_secs_f64(),
            });
        }
    }
    Ok(RegionResult { points, anchors })
}

#[derive(Clone, Debug, Serialize)]
pub struct ModelPair {
    pub realization: usize,
    pub n_tones: usize,
    pub target_db: f64,
    pub nonlinear: Outcome,
    pub linear: Outcome,
    /// Both designs scored with the nonlinear metric.
    pub z_nonlinear_design: Option<f64>,
    pub z_linear_design: Option<f64>,
    pub seconds: f64,
}

impl ModelPair {
    pub fn gap(&self) -> Option<f64> {
        Some(self.z_nonlinear_design? - self.z_linear_design?)
    }
}

pub fn compare_models(scenario: &Scenario, p: &CompareParams) -> Result<Vec<ModelPair>> {
    let k = scenario.system.n_tags;
    let mut out = Vec::new();
    for r in 0..scenario.realizations() {
        for &n in &p.n_tones {
            let ch = scenario.channel(r, k, n)?;
            let base = scenario.system_for(k, n, r);
            for &t in &p.targets_db {
                let start = Instant::now();
                let nl = base.with_targets(db_to_linear(t)).with_model(EhModel::Nonlinear4th);
                let lin = nl.with_model(EhModel::Linear2nd);
                let warm = algorithm1_feasibility(&nl, &ch)?;
                let a = optimize(&nl, &ch, &warm, p.algorithm, Design::Forward)?;
                let b = optimize(&lin, &ch, &warm, p.algorithm, Design::Forward)?;
                let za = a.solved().map(|s| s.solution.harvest.total);
                let zb = match b.solved() {
                    Some(s) => Some(nonlinear_score(&nl, &ch, &s.solution.waveform)?),
                    None => None,
                };
                out.push(ModelPair {
                    realization: r,
                    n_tones: n,
                    target_db: t,
                    nonlinear: a,
                    linear: b,
                    z_nonlinear_design: za,
                    z_linear_design: zb,
                    seconds: start.elapsed().as_secs_f64(),
                });
            }
        }
    }
    Ok(out)
}

pub const TDMA_FRAME: usize = 10;

#[derive(Clone, Debug, Serialize)]
pub struct TdmaRealization {
    pub realization: usize,
    /// Per-tag `z_dc` of the simultaneous design.
    pub simultaneous: Option<Vec<f64>>,
    /// `splits[t1]`: per-tag time-averaged `z_dc` for `(t1, 10 − t1)`.
    pub splits: Option<Vec<[f64; 2]>>,
    pub seconds: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct TdmaSummary {
    pub rows: Vec<TdmaRealization>,
    /// Realizations where every scheme was solved.
    pub used: usize,
    pub simultaneous_avg: [f64; 2],
    pub split_avg: Vec<[f64; 2]>,
}

fn single_tag_z(
    scenario: &Scenario,
    ch: &ChannelRealization<f64>,
    r: usize,
    tag: usize,
    power: f64,
    algorithm: Algorithm,
) -> Result<Option<f64>> {
    let n = ch.n_tones();
    let sub = ch.select_tags(&[tag]);
    let mut cfg = scenario.system_for(1, n, r);
    cfg.sinr_targets = vec![scenario.system.sinr_targets[tag]];
    cfg.tag_weights = vec![scenario.system.tag_weights[tag]];
    cfg.tx_power = power;
    let warm = algorithm1_feasibility(&cfg, &sub)?;
    Ok(optimize(&cfg, &sub, &warm, algorithm, Design::Forward)?
        .solved()
        .map(|s| s.solution.harvest.total))
}

pub fn tdma_comparison(scenario: &Scenario, p: &TdmaParams) -> Result<TdmaSummary> {
    let n = scenario.system.n_tones;
    let target = db_to_linear(p.target_db);
    let mut rows = Vec::new();
    for r in 0..scenario.realizations() {
        let start = Instant::now();
        let ch = scenario.channel(r, 2, n)?;
        let cfg = scenario.system_for(2, n, r).with_targets(target);
        let scenario = Scenario {
            system: cfg.clone(),
            ..scenario.clone()
        };
        let warm = algorithm1_feasibility(&cfg, &ch)?;
        let simultaneous = optimize(&cfg, &ch, &warm, p.algorithm, Design::Forward)?
            .solved()
            .map(|s| s.solution.harvest.per_tag.clone());

        let mut splits = simultaneous.as_ref().map(|_| vec![[0.0; 2]; TDMA_FRAME + 1]);
        let mut same_power: [Option<Option<f64>>; 2] = [None, None];
        'outer: for t1 in 0..=TDMA_FRAME {
            if splits.is_none() {
                break;
            }
            let slots = [t1, TDMA_FRAME - t1];
            for tag in 0..2 {
                if slots[tag] == 0 {
                    continue;
                }
                let z = if p.energy_conserving {
                    let power = cfg.tx_power * TDMA_FRAME as f64 / slots[tag] as f64;
                    single_tag_z(&scenario, &ch, r, tag, power, p.algorithm)?
                } else {
                    match same_power[tag] {
                        Some(z) => z,
                        None => {
                            let z = single_tag_z(&scenario, &ch, r, tag, cfg.tx_power, p.algorithm)?;
                            same_power[tag] = Some(z);
                            z
                        }
                    }
                };
                match (z, splits.as_mut()) {
                    (Some(z), Some(s)) => s[t1][tag] = slots[tag] as f64 / TDMA_FRAME as f64 * z,
                    _ => {
                        splits = None;
                        break 'outer;
                    }
                }
            }
        }
        rows.push(TdmaRealization {
            realization: r,
            simultaneous,
            splits,
            seconds: start.elapsed().as_secs_f64(),
        });
    }

    let used: Vec<&TdmaRealization> = rows
        .iter()
        .filter(|r| r.simultaneous.is_some() && r.splits.is_some())
        .collect();
    let m = used.len().max(1) as f64;
    let mut simultaneous_avg = [0.0; 2];
    let mut split_avg = vec![[0.0; 2]; TDMA_FRAME + 1];
    for row in &used {
        let s = row.simultaneous.as_ref().expect("filtered");
        let t = row.splits.as_ref().expect("filtered");
        for tag in 0..2 {
            simultaneous_avg[tag] += s[tag] / m;
            for (acc, v) in split_avg.iter_mut().zip(t) {
                acc[tag] += v[tag] / m;
            }
        }
    }
    Ok(TdmaSummary {
        used: used.len(),
        rows,
        simultaneous_avg,
        split_avg,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct GridRun {
    pub k: usize,
    pub n: usize,
    pub realization: usize,
    pub variant: Variant,
    pub feasible: bool,
    /// Nonlinear forward-channel `Z_DC` of the design.
    pub z_dc: Option<f64>,
    /// γ trace of the SCA loop.
    pub gammas: Vec<f64>,
    pub seconds: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct GridCell {
    pub k: usize,
    pub n: usize,
    pub variant: Variant,
    pub realizations: usize,
    pub solved: usize,
    pub avg_z_dc: Option<f64>,
    pub avg_z_dc_per_tag: Option<f64>,
}

impl GridCell {
    pub fn failure_rate(&self) -> f64 {
        1.0 - self.solved as f64 / self.realizations as f64
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct GridResult {
    pub runs: Vec<GridRun>,
    pub cells: Vec<GridCell>,
}

pub fn zdc_vs_kn(scenario: &Scenario, p: &GridParams) -> Result<GridResult> {
    let target = db_to_linear(p.target_db);
    let mut runs = Vec::new();
    for &(k, n) in &p.cells {
        for r in 0..scenario.realizations() {
            let ch = scenario.channel(r, k, n)?;
            let cfg = scenario.system_for(k, n, r).with_targets(target);
            let warm = algorithm1_feasibility(&cfg, &ch)?;
            for v in &p.variants {
                let start = Instant::now();
                let vcfg = cfg.with_model(v.model.into());
                let o = optimize(&vcfg, &ch, &warm, v.algorithm, v.design)?;
                let (z, gammas) = match o.solved() {
                    Some(s) => (
                        Some(nonlinear_score(&cfg, &ch, &s.solution.waveform)?),
                        s.solution.trace.iter().map(|t| t.gamma).collect(),
                    ),
                    None => (None, vec![]),
                };
                runs.push(GridRun {
                    k,
                    n,
                    realization: r,
                    variant: *v,
                    feasible: z.is_some(),
                    z_dc: z,
                    gammas,
                    seconds: start.elapsed().as_secs_f64(),
                });
            }
        }
    }
    let mut cells = Vec::new();
    for &(k, n) in &p.cells {
        for v in &p.variants {
            let sel: Vec<f64> = runs
                .iter()
                .filter(|x| x.k == k && x.n == n && x.variant == *v)
                .filter_map(|x| x.z_dc)
                .collect();
            let avg = (!sel.is_empty()).then(|| sel.iter().sum::<f64>() / sel.len() as f64);
            cells.push(GridCell {
                k,
                n,
                variant: *v,
                realizations: scenario.realizations(),
                solved: sel.len(),
                avg_z_dc: avg,
                avg_z_dc_per_tag: avg.map(|a| a / k as f64),
            });
        }
    }
    Ok(GridResult { runs, cells })
}

/// A named CSV table.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    fn new(name: &str, header: Vec<String>) -> Self {
        Self {
            name: name.into(),
            header,
            rows: Vec::new(),
        }
    }
}

fn num(x: f64) -> String {
    format!("{x}")
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

fn tagged(prefix: &str, k: usize) -> Vec<String> {
    (1..=k).map(|j| format!("{prefix}_{j}")).collect()
}

#[derive(Clone, Debug)]
pub struct RunOutput {
    pub tables: Vec<Table>,
    /// `(table, row, seconds)`; kept apart from the tables so they stay
    /// reproducible.
    pub timing: Vec<(String, usize, f64)>,
    pub any_feasible: bool,
}

fn region_tables(k: usize, res: &RegionResult) -> RunOutput {
    let mut header: Vec<String> = ["realization", "target_db", "target_linear", "feasible", "z_dc_total"]
        .map(String::from)
        .into();
    header.extend(tagged("z_dc_tag", k));
    header.extend(tagged("sinr_tag", k));
    header.extend(["iters", "method"].map(String::from));
    let mut t = Table::new("region", header);
    let mut timing = Vec::new();
    for (i, p) in res.points.iter().enumerate() {
        let mut row = vec![
            p.realization.to_string(),
            num(p.target_db),
            num(p.target_linear),
            p.feasible().to_string(),
        ];
        match p.outcome.solved() {
            Some(s) => {
                row.push(num(s.solution.harvest.total));
                row.extend(s.solution.harvest.per_tag.iter().map(|&v| num(v)));
                row.extend(s.solution.sinrs.iter().map(|&v| num(v)));
                row.push(s.solution.iterations.to_string());
            }
            None => {
                row.extend(std::iter::repeat_n(String::new(), 1 + 2 * k));
                row.push("0".into());
            }
        }
        row.push(p.outcome.method());
        t.rows.push(row);
        timing.push(("region".to_string(), i, p.seconds));
    }
    let mut header: Vec<String> = ["realization", "anchor", "z_dc_total"].map(String::from).into();
    header.extend(tagged("z_dc_tag", k));
    header.extend(tagged("sinr_tag", k));
    let mut a = Table::new("anchors", header);
    for x in &res.anchors {
        let mut row = vec![x.realization.to_string(), x.kind.to_string(), num(x.total)];
        row.extend(x.z_dc.iter().map(|&v| num(v)));
        row.extend(x.sinrs.iter().map(|&v| num(v)));
        a.rows.push(row);
    }
    RunOutput {
        tables: vec![t, a],
        timing,
        any_feasible: res.points.iter().any(TradeoffPoint::feasible),
    }
}

fn compare_tables(pairs: &[ModelPair]) -> RunOutput {
    let header = [
        "realization",
        "n_tones",
        "target_db",
        "feasible",
        "z_dc_nonlinear_design",
        "z_dc_linear_design",
        "gap",
        "method_nonlinear",
        "method_linear",
    ]
    .map(String::from)
    .into();
    let mut t = Table::new("compare_models", header);
    let mut timing = Vec::new();
    for (i, p) in pairs.iter().enumerate() {
        t.rows.push(vec![
            p.realization.to_string(),
            p.n_tones.to_string(),
            num(p.target_db),
            (p.z_nonlinear_design.is_some() && p.z_linear_design.is_some()).to_string(),
            opt(p.z_nonlinear_design),
            opt(p.z_linear_design),
            opt(p.gap()),
            p.nonlinear.method(),
            p.linear.method(),
        ]);
        timing.push(("compare_models".to_string(), i, p.seconds));
    }
    RunOutput {
        tables: vec![t],
        timing,
        any_feasible: pairs.iter().any(|p| p.z_nonlinear_design.is_some()),
    }
}

fn tdma_tables(s: &TdmaSummary) -> RunOutput {
    let header = ["scheme", "t1", "t2", "z_dc_total", "z_dc_tag_1", "z_dc_tag_2", "realizations"]
        .map(String::from)
        .into();
    let mut t = Table::new("tdma", header);
    let used = s.used.to_string();
    let a = s.simultaneous_avg;
    t.rows.push(vec![
        "simultaneous".into(),
        String::new(),
        String::new(),
        num(a[0] + a[1]),
        num(a[0]),
        num(a[1]),
        used.clone(),
    ]);
    for (t1, v) in s.split_avg.iter().enumerate() {
        t.rows.push(vec![
            "tdma".into(),
            t1.to_string(),
            (TDMA_FRAME - t1).to_string(),
            num(v[0] + v[1]),
            num(v[0]),
            num(v[1]),
            used.clone(),
        ]);
    }
    let header = ["realization", "scheme", "t1", "t2", "z_dc_tag_1", "z_dc_tag_2"]
        .map(String::from)
        .into();
    let mut raw = Table::new("tdma_runs", header);
    let mut timing = Vec::new();
    for (i, row) in s.rows.iter().enumerate() {
        let r = row.realization.to_string();
        let sim = row.simultaneous.as_ref();
        raw.rows.push(vec![
            r.clone(),
            "simultaneous".into(),
            String::new(),
            String::new(),
            opt(sim.map(|v| v[0])),
            opt(sim.map(|v| v[1])),
        ]);
        if let Some(splits) = &row.splits {
            for (t1, v) in splits.iter().enumerate() {
                raw.rows.push(vec![
                    r.clone(),
                    "tdma".into(),
                    t1.to_string(),
                    (TDMA_FRAME - t1).to_string(),
                    num(v[0]),
                    num(v[1]),
                ]);
            }
        }
        timing.push(("tdma_runs".to_string(), i, row.seconds));
    }
    RunOutput {
        tables: vec![t, raw],
        timing,
        any_feasible: s.used > 0,
    }
}

fn grid_tables(g: &GridResult) -> RunOutput {
    let header = [
        "k",
        "n",
        "variant",
        "realizations",
        "solved",
        "failure_rate",
        "avg_z_dc",
        "avg_z_dc_per_tag",
    ]
    .map(String::from)
    .into();
    let mut t = Table::new("grid", header);
    for c in &g.cells {
        t.rows.push(vec![
            c.k.to_string(),
            c.n.to_string(),
            c.variant.label(),
            c.realizations.to_string(),
            c.solved.to_string(),
            num(c.failure_rate()),
            opt(c.avg_z_dc),
            opt(c.avg_z_dc_per_tag),
        ]);
    }
    let header = ["k", "n", "realization", "variant", "feasible", "z_dc_total"]
        .map(String::from)
        .into();
    let mut raw = Table::new("grid_runs", header);
    let mut timing = Vec::new();
    for (i, r) in g.runs.iter().enumerate() {
        raw.rows.push(vec![
            r.k.to_string(),
            r.n.to_string(),
            r.realization.to_string(),
            r.variant.label(),
            r.feasible.to_string(),
            opt(r.z_dc),
        ]);
        timing.push(("grid_runs".to_string(), i, r.seconds));
    }
    RunOutput {
        tables: vec![t, raw],
        timing,
        any_feasible: g.runs.iter().any(|r| r.feasible),
    }
}

/// Executes a run specification and renders its tables.
pub fn execute(spec: &RunSpec) -> Result<RunOutput> {
    spec.validate()?;
    let s = &spec.scenario;
    Ok(match &spec.experiment {
        Experiment::Region(p) => region_tables(s.system.n_tags, &trace_region(s, p)?),
        Experiment::CompareModels(p) => compare_tables(&compare_models(s, p)?),
        Experiment::Tdma(p) => tdma_tables(&tdma_comparison(s, p)?),
        Experiment::Grid(p) => grid_tables(&zdc_vs_kn(s, p)?),
    })
}

/// Default `(K, N)` cells: `K ∈ {1, 2, 3}`, `N ∈ {4, 8, 16}`.
pub fn default_cells() -> Vec<(usize, usize)> {
    let mut cells = Vec::new();
    for k in 1..=3 {
        for n in [4, 8, 16] {
            cells.push((k, n));
        }
    }
    cells
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spec::Model;

    #[test]
    fn default_targets_stop_at_the_bound() {
        let p = RegionParams {
            targets_db: Vec::new(),
            step_db: 5.0,
            algorithm: Algorithm::Alg2,
            design: Design::Forward,
            model: Model::Nonlinear,
        };
        assert_eq!(region_targets(&p, db_to_linear(7.0)), vec![-10.0, -5.0, 0.0, 5.0]);
        let given = RegionParams {
            targets_db: vec![1.0],
            ..p
        };
        assert_eq!(region_targets(&given, 0.0), vec![1.0]);
    }

    #[test]
    fn float_cells_round_trip() {
        for x in [0.1, 1.0 / 3.0, 3.6176e-6, -0.0] {
            assert_eq!(num(x).parse::<f64>().unwrap().to_bits(), x.to_bits());
        }
        assert_eq!(opt(None), "");
    }
}
