//! Execution of each experiment kind into an in-memory output bundle.

use rayon::prelude::*;
use serde_json::{json, Map, Value};

use crate::ar1_processes::{decomposition_bound, simulate_pair, Ar1Config};
use crate::error::{Error, Result};
use crate::moment_gap::{
    gap_report, verify_cr_inequality, verify_minkowski_gap, verify_pointwise_inequalities,
    CoupledArrays, MomentGapReport,
};
use crate::random_fields::{
    all_lambda_pairs, check_marginal_stationarity, field_gap_report, simulate_field, sup_gap,
    FieldSample, STATIONARITY_LEVEL,
};
use crate::sampling::{
    make_stream, uniform01, InnovationSpec, RandomStream, StreamKey, LANE_INNOVATIONS,
    LANE_SECONDARY,
};
use crate::stats;
use crate::surrogate_models::{
    kriging_surrogate_pair, net_moment_bound_check, theorem_c_gap, zeta_schedule,
};
use crate::ui_diagnostics::{
    check_ui_sufficient, default_grid, geometric_grid, ic_compare, tail_functional,
};

use super::config::*;
use super::output::{fmt_f64, fmt_opt, OutputFile, Table};
use super::plot::{LinePlot, Series};
use super::SUMMARY_NAME;

/// Replications per stream in [`draw_iid`].
const CHUNK: usize = 4096;

/// Everything a run produces before it is written.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub files: Vec<OutputFile>,
    pub summary: Value,
}

/// `m` i.i.d. draws; chunk `c` comes from stream `key.with_replication(base + c)`,
/// so the result does not depend on how the chunks are scheduled.
pub fn draw_iid(
    m: usize,
    key: StreamKey,
    draw: impl Fn(&mut RandomStream) -> f64 + Sync,
) -> Vec<f64> {
    let base = key.replication_id;
    let chunks = m.div_ceil(CHUNK);
    let parts: Vec<Vec<f64>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut s = make_stream(key.with_replication(base + c as u64));
            let len = CHUNK.min(m - c * CHUNK);
            (0..len).map(|_| draw(&mut s)).collect()
        })
        .collect();
    parts.concat()
}

fn innovation_draws(spec: &InnovationSpec, m: usize, key: StreamKey) -> Result<Vec<f64>> {
    let sampler = spec.sampler()?;
    Ok(draw_iid(m, key, |s| sampler.draw(s)))
}

fn stage<T>(name: &str, r: Result<T>) -> Result<T> {
    r.map_err(|e| e.in_stage(name))
}

fn r_tag(r: f64) -> String {
    format!("r{}", fmt_f64(r))
}

struct Ctx {
    seed: u64,
    m: usize,
    plots: bool,
    files: Vec<OutputFile>,
    summary: Map<String, Value>,
}

impl Ctx {
    fn key(&self) -> StreamKey {
        StreamKey::new(self.seed, 0, LANE_INNOVATIONS)
    }

    fn csv(&mut self, name: String, t: &Table) -> Result<()> {
        self.files.push(OutputFile::csv(name, t)?);
        Ok(())
    }

    fn plot(&mut self, name: String, p: LinePlot) -> Result<()> {
        if self.plots {
            self.files.push(OutputFile {
                name,
                bytes: p.to_svg()?.into_bytes(),
            });
        }
        Ok(())
    }

    fn set(&mut self, k: &str, v: Value) {
        self.summary.insert(k.to_string(), v);
    }
}

/// Run an experiment in the current rayon pool.
pub fn execute(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let mut ctx = Ctx {
        seed: cfg.master_seed,
        m: cfg.replications,
        plots: cfg.plots,
        files: Vec::new(),
        summary: Map::new(),
    };
    ctx.set("schema_version", json!(SCHEMA_VERSION));
    ctx.set("kind", json!(cfg.experiment.kind()));
    ctx.set("master_seed", json!(cfg.master_seed));
    ctx.set("M", json!(cfg.replications));
    match &cfg.experiment {
        Experiment::Ar1Gap(p) => ar1_gap(&mut ctx, p)?,
        Experiment::UiDiagnostic(p) => ui_diagnostic(&mut ctx, p)?,
        Experiment::IcCompare(p) => ic(&mut ctx, p)?,
        Experiment::FieldGap(p) => field_gap(&mut ctx, p)?,
        Experiment::StationarityCheck(p) => stationarity(&mut ctx, p)?,
        Experiment::NetTheoremC(p) => net_theorem_c(&mut ctx, p)?,
        Experiment::NetMomentBound(p) => net_moment(&mut ctx, p)?,
        Experiment::KrigingGap(p) => kriging_gap(&mut ctx, p)?,
        Experiment::InequalitySuite(p) => inequality_suite(&mut ctx, p)?,
    }
    let summary = Value::Object(ctx.summary);
    ctx.files.push(OutputFile::json(SUMMARY_NAME, &summary)?);
    Ok(RunOutput {
        files: ctx.files,
        summary,
    })
}

fn gap_table(report: &MomentGapReport, m: usize) -> Table {
    let mut t = Table::new(&[
        "n",
        "r",
        "gap_lr",
        "gap_abs_moment",
        "gap_mean",
        "gap_norm",
        "half_width",
        "M",
    ]);
    for row in &report.rows {
        t.push(vec![
            row.n.to_string(),
            fmt_f64(report.r),
            fmt_f64(row.gap.gap_lr),
            fmt_f64(row.gap.gap_abs_moment),
            fmt_opt(row.gap.gap_mean),
            fmt_f64(row.gap.gap_norm),
            fmt_f64(row.gap.hw_lr),
            m.to_string(),
        ]);
    }
    t
}

fn gap_plot(title: &str, reports: &[MomentGapReport]) -> LinePlot {
    LinePlot {
        title: title.to_string(),
        x_label: "n".into(),
        y_label: "gap".into(),
        log_x: true,
        log_y: true,
        series: reports
            .iter()
            .map(|rep| Series {
                label: format!("gap_lr r={}", fmt_f64(rep.r)),
                points: rep
                    .rows
                    .iter()
                    .map(|row| (row.n as f64, row.gap.gap_lr))
                    .collect(),
            })
            .collect(),
    }
}

/// Gap tables, summary entries and a plot for a set of coupled samples.
fn emit_gap_reports(
    ctx: &mut Ctx,
    prefix: &str,
    pairs: &[CoupledArrays<'_>],
    rs: &[f64],
) -> Result<()> {
    let mut reports = Vec::with_capacity(rs.len());
    let mut decreasing = Map::new();
    for &r in rs {
        let rep = stage("moment_gap", gap_report(pairs, r))?;
        ctx.csv(
            format!("{prefix}_{}.csv", r_tag(r)),
            &gap_table(&rep, ctx.m),
        )?;
        decreasing.insert(fmt_f64(r), json!(rep.gap_lr_strictly_decreasing()));
        reports.push(rep);
    }
    ctx.set("gap_lr_strictly_decreasing", Value::Object(decreasing));
    ctx.set("reports", serde_json::to_value(&reports)?);
    ctx.plot(
        format!("{prefix}.svg"),
        gap_plot(&format!("{prefix} vs n"), &reports),
    )?;
    Ok(())
}

fn ar1_gap(ctx: &mut Ctx, p: &Ar1GapParams) -> Result<()> {
    let cfg: &Ar1Config = &p.process;
    let cesaro_ok = cfg.uncertainty.check_cesaro(&p.n_grid, 0.1).is_ok();
    if !cesaro_ok {
        log::warn!("uncertainty sequence does not look Cesàro-null on this grid");
    }
    let key = ctx.key();
    let samples = p
        .n_grid
        .iter()
        .map(|&n| {
            log::info!("ar1_gap: simulating n = {n}");
            stage("ar1_processes", simulate_pair(cfg, n, ctx.m, key))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut t = Table::new(&[
        "n",
        "q",
        "mean_gap",
        "mean_offset",
        "mean_mean_error",
        "mean_tail",
        "violations",
    ]);
    let mut violations = 0usize;
    for s in &samples {
        let terms = stage("ar1_processes", decomposition_bound(cfg, s.n, s))?;
        let bad = terms.iter().filter(|d| !d.holds).count();
        violations += bad;
        let mean = |f: fn(&crate::ar1_processes::DecompositionTerms) -> f64| {
            fmt_f64(stats::pairwise_sum_by(&terms, &f) / terms.len() as f64)
        };
        t.push(vec![
            s.n.to_string(),
            s.q.to_string(),
            mean(|d| d.gap),
            mean(|d| d.offset_mean),
            mean(|d| d.mean_error),
            mean(|d| d.tail),
            bad.to_string(),
        ]);
    }
    ctx.csv("decomposition.csv".into(), &t)?;
    ctx.set("decomposition_violations", json!(violations));
    ctx.set("cesaro_ok", json!(cesaro_ok));
    let pairs: Vec<CoupledArrays<'_>> = samples.iter().map(CoupledArrays::from).collect();
    emit_gap_reports(ctx, "gap", &pairs, &p.r)
}

fn ui_samples(ctx: &Ctx, p: &UiParams) -> Result<Vec<Vec<f64>>> {
    let sampler = match &p.family {
        UiFamily::Iid { innovation } => Some(innovation.sampler()?),
        UiFamily::Spike => None,
    };
    Ok(p.n_grid
        .iter()
        .map(|&n| {
            let key = StreamKey::new(ctx.seed, (n as u64) << 32, LANE_INNOVATIONS);
            match &sampler {
                Some(s) => draw_iid(ctx.m, key, |rng| s.draw(rng)),
                None => {
                    let cut = 1.0 / n as f64;
                    let v = n as f64;
                    draw_iid(ctx.m, key, |rng| if uniform01(rng) < cut { v } else { 0.0 })
                }
            }
        })
        .collect())
}

fn ui_diagnostic(ctx: &mut Ctx, p: &UiParams) -> Result<()> {
    let samples = ui_samples(ctx, p)?;
    let a_grid = match &p.a_grid {
        Some(g) => g.clone(),
        None => {
            let pooled: Vec<f64> = samples
                .iter()
                .flatten()
                .map(|x| x.abs().powf(p.r))
                .collect();
            stage("ui_diagnostics", default_grid(&pooled, 20))?
        }
    };
    let curve = stage("ui_diagnostics", tail_functional(&samples, p.r, &a_grid))?;
    let ui = stage(
        "ui_diagnostics",
        check_ui_sufficient(&samples, p.delta, p.cap),
    )?;

    let mut t = Table::new(&["n", "a", "value", "half_width"]);
    for (n, row) in p.n_grid.iter().zip(&curve.values) {
        for (a, pt) in a_grid.iter().zip(row) {
            t.push(vec![
                n.to_string(),
                fmt_f64(*a),
                fmt_f64(pt.value),
                fmt_f64(pt.half_width),
            ]);
        }
    }
    ctx.csv("tail_functional.csv".into(), &t)?;
    let mut t = Table::new(&["n", "delta", "estimate", "half_width"]);
    for (n, e) in p.n_grid.iter().zip(&ui.estimates) {
        t.push(vec![
            n.to_string(),
            fmt_f64(p.delta),
            fmt_f64(e.value),
            fmt_f64(e.half_width),
        ]);
    }
    ctx.csv("ui_moments.csv".into(), &t)?;

    // suspect: at the largest n the tail beyond the largest A is still
    // significantly above the threshold
    let last = curve.values.last().and_then(|r| r.last()).copied();
    let ui_suspect = last.is_some_and(|pt| pt.value - pt.half_width > p.tail_threshold);
    ctx.set("ui_suspect", json!(ui_suspect));
    ctx.set("tail_threshold", json!(p.tail_threshold));
    ctx.set("tail_at_max_a", json!(last));
    ctx.set("ui_sufficient", serde_json::to_value(&ui)?);
    ctx.set("a_grid", json!(a_grid));
    ctx.set("n_grid", json!(p.n_grid));

    let series = p
        .n_grid
        .iter()
        .zip(&curve.values)
        .map(|(n, row)| Series {
            label: format!("n={n}"),
            points: a_grid
                .iter()
                .zip(row)
                .map(|(a, pt)| (*a, pt.value))
                .collect(),
        })
        .collect();
    ctx.plot(
        "tail_functional.svg".into(),
        LinePlot {
            title: "tail functional vs A".into(),
            x_label: "A".into(),
            y_label: "E|X|^r 1(|X|^r > A)".into(),
            log_x: true,
            log_y: true,
            series,
        },
    )?;
    Ok(())
}

fn nonneg_draws(law: &NonnegLaw, m: usize, key: StreamKey) -> Result<Vec<f64>> {
    law.validate()?;
    Ok(match *law {
        NonnegLaw::Exponential { rate } => draw_iid(m, key, |s| -(1.0 - uniform01(s)).ln() / rate),
        NonnegLaw::Uniform { low, high } => draw_iid(m, key, |s| low + (high - low) * uniform01(s)),
        NonnegLaw::AbsInnovation { innovation } => {
            let sampler = innovation.sampler()?;
            draw_iid(m, key, |s| sampler.draw(s).abs())
        }
    })
}

fn ic(ctx: &mut Ctx, p: &IcParams) -> Result<()> {
    let s1 = stage("sampling", nonneg_draws(&p.sample1, ctx.m, ctx.key()))?;
    let s2 = stage(
        "sampling",
        nonneg_draws(&p.sample2, ctx.m, ctx.key().with_lane(LANE_SECONDARY)),
    )?;
    let t_grid = match &p.t_grid {
        Some(g) => g.clone(),
        None => {
            let hi = s1.iter().chain(&s2).copied().fold(0.0, f64::max).max(1e-6);
            let mut g = vec![0.0];
            g.extend(stage("ui_diagnostics", geometric_grid(hi * 1e-3, hi, 30))?);
            g
        }
    };
    let cmp = stage("ui_diagnostics", ic_compare(&s1, &s2, &t_grid))?;
    let mut t = Table::new(&["t", "h1", "h2", "margin", "slack"]);
    for mg in &cmp.margins {
        t.push(vec![
            fmt_f64(mg.t),
            fmt_f64(mg.h1),
            fmt_f64(mg.h2),
            fmt_f64(mg.margin()),
            fmt_f64(mg.slack),
        ]);
    }
    ctx.csv("ic_margins.csv".into(), &t)?;
    ctx.set("verdict", serde_json::to_value(cmp.verdict)?);
    ctx.set("t_grid", json!(t_grid));
    let series = |label: &str, f: fn(&crate::ui_diagnostics::IcMargin) -> f64| Series {
        label: label.to_string(),
        points: cmp.margins.iter().map(|m| (m.t, f(m))).collect(),
    };
    let plot = LinePlot {
        title: "integrated survivor functions".into(),
        x_label: "t".into(),
        y_label: "H(t)".into(),
        log_x: false,
        log_y: true,
        series: vec![series("sample1", |m| m.h1), series("sample2", |m| m.h2)],
    };
    ctx.plot("ic_compare.svg".into(), plot)?;
    Ok(())
}

fn field_samples(ctx: &Ctx, spec: &crate::random_fields::FieldSpec) -> Result<Vec<FieldSample>> {
    spec.n_grid
        .iter()
        .map(|n| stage("random_fields", simulate_field(spec, n, ctx.m, ctx.key())))
        .collect()
}

fn field_gap(ctx: &mut Ctx, p: &FieldGapParams) -> Result<()> {
    let samples = field_samples(ctx, &p.field)?;
    let mut reports = Vec::new();
    for &r in &p.r {
        let rep = stage("random_fields", field_gap_report(&samples, r))?;
        let mut t = Table::new(&[
            "n",
            "r",
            "sup_gap_lr",
            "argmax_lr",
            "sup_gap_abs_moment",
            "argmax_abs_moment",
            "sup_gap_mean",
            "argmax_mean",
            "sup_gap_norm",
            "argmax_norm",
            "M",
        ]);
        let mut per = Table::new(&[
            "n",
            "lambda",
            "gap_lr",
            "gap_abs_moment",
            "gap_mean",
            "gap_norm",
            "half_width",
        ]);
        for row in &rep.rows {
            t.push(vec![
                row.n.to_string(),
                fmt_f64(r),
                fmt_f64(row.sup_gap_lr),
                row.argmax_lr.to_string(),
                fmt_f64(row.sup_gap_abs_moment),
                row.argmax_abs_moment.to_string(),
                fmt_opt(row.sup_gap_mean),
                row.argmax_mean.map(|a| a.to_string()).unwrap_or_default(),
                fmt_f64(row.sup_gap_norm),
                row.argmax_norm.to_string(),
                ctx.m.to_string(),
            ]);
            for (lambda, g) in rep.lambda_grid.iter().zip(&row.per_lambda) {
                per.push(vec![
                    row.n.to_string(),
                    lambda.to_string(),
                    fmt_f64(g.gap_lr),
                    fmt_f64(g.gap_abs_moment),
                    fmt_opt(g.gap_mean),
                    fmt_f64(g.gap_norm),
                    fmt_f64(g.hw_lr),
                ]);
            }
        }
        ctx.csv(format!("field_gap_{}.csv", r_tag(r)), &t)?;
        ctx.csv(format!("field_gap_lambda_{}.csv", r_tag(r)), &per)?;
        reports.push(rep);
    }

    let c = p.exceed_threshold;
    let mut t = Table::new(&[
        "n",
        "mean_sup_diff",
        "half_width",
        "threshold",
        "exceed_frequency",
    ]);
    for s in &samples {
        let sup = sup_gap(s);
        let est = stats::mean_estimate(&sup);
        let freq = sup.iter().filter(|&&v| v > c).count() as f64 / sup.len() as f64;
        t.push(vec![
            s.n.to_string(),
            fmt_f64(est.mean),
            fmt_f64(est.half_width),
            fmt_f64(c),
            fmt_f64(freq),
        ]);
    }
    ctx.csv("sup_gap.csv".into(), &t)?;
    ctx.set("reports", serde_json::to_value(&reports)?);
    let series = reports
        .iter()
        .map(|rep| Series {
            label: format!("sup gap_lr r={}", fmt_f64(rep.r)),
            points: rep
                .rows
                .iter()
                .map(|row| (row.n.min_component() as f64, row.sup_gap_lr))
                .collect(),
        })
        .collect();
    ctx.plot(
        "field_gap.svg".into(),
        LinePlot {
            title: "sup over λ of the gap vs min(n)".into(),
            x_label: "min(n)".into(),
            y_label: "gap".into(),
            log_x: true,
            log_y: true,
            series,
        },
    )?;
    Ok(())
}

fn stationarity(ctx: &mut Ctx, p: &StationarityParams) -> Result<()> {
    let spec = &p.field;
    let n = match &p.n {
        Some(n) => n.clone(),
        None => spec
            .n_grid
            .last()
            .cloned()
            .ok_or_else(|| Error::config("field n_grid must not be empty"))?,
    };
    let sample = stage("random_fields", simulate_field(spec, &n, ctx.m, ctx.key()))?;
    let pairs = p
        .lambda_pairs
        .clone()
        .unwrap_or_else(|| all_lambda_pairs(&spec.lambda_grid));
    let checks = stage(
        "random_fields",
        check_marginal_stationarity(&sample, &pairs),
    )?;
    let mut t = Table::new(&[
        "lambda",
        "lambda_prime",
        "ks_x",
        "ks_y",
        "ks_diff",
        "critical_value",
        "consistent",
    ]);
    for c in &checks {
        t.push(vec![
            c.lambda.to_string(),
            c.lambda_prime.to_string(),
            fmt_f64(c.ks_x),
            fmt_f64(c.ks_y),
            fmt_f64(c.ks_diff),
            fmt_f64(c.critical_value),
            c.consistent.to_string(),
        ]);
    }
    ctx.csv("stationarity.csv".into(), &t)?;
    let consistent = checks.iter().filter(|c| c.consistent).count();
    ctx.set("n", json!(n));
    ctx.set("pairs", json!(checks.len()));
    ctx.set("consistent_pairs", json!(consistent));
    ctx.set("all_consistent", json!(consistent == checks.len()));
    ctx.set("level", json!(STATIONARITY_LEVEL));
    Ok(())
}

fn net_theorem_c(ctx: &mut Ctx, p: &NetTheoremCParams) -> Result<()> {
    let net = stage("network", p.net.resolve())?;
    let zeta = net.zeta();
    let estimates = stage(
        "network",
        zeta_schedule(&zeta, &p.schedule, &p.n_grid, ctx.key()),
    )?;
    let rep = stage(
        "network",
        theorem_c_gap(&net, &zeta, &estimates, &p.input_law, ctx.m, ctx.key()),
    )?;
    let mut t = Table::new(&[
        "n",
        "perturbation_norm",
        "max_gap",
        "mean_gap",
        "mean_gap_half_width",
        "bound",
        "holds",
    ]);
    for row in &rep.rows {
        t.push(vec![
            row.n.to_string(),
            fmt_f64(row.perturbation_norm),
            fmt_f64(row.max_gap),
            fmt_f64(row.mean_gap),
            fmt_f64(row.mean_gap_hw),
            fmt_f64(row.bound),
            row.holds.to_string(),
        ]);
    }
    ctx.csv("theorem_c.csv".into(), &t)?;
    let failures = rep.rows.iter().filter(|r| !r.holds).count();
    ctx.set("flag_failures", json!(failures));
    ctx.set("lipschitz", serde_json::to_value(&rep.lipschitz)?);
    let pts = |f: fn(&crate::surrogate_models::TheoremCRow) -> f64| {
        rep.rows.iter().map(|r| (r.n as f64, f(r))).collect()
    };
    ctx.plot(
        "theorem_c.svg".into(),
        LinePlot {
            title: "network output gap vs n".into(),
            x_label: "n".into(),
            y_label: "gap".into(),
            log_x: true,
            log_y: true,
            series: vec![
                Series {
                    label: "max gap".into(),
                    points: pts(|r| r.max_gap),
                },
                Series {
                    label: "bound".into(),
                    points: pts(|r| r.bound),
                },
            ],
        },
    )?;
    Ok(())
}

fn net_moment(ctx: &mut Ctx, p: &NetMomentParams) -> Result<()> {
    let net = stage("network", p.net.resolve())?;
    let check = stage(
        "network",
        net_moment_bound_check(
            &net,
            &p.input_law,
            p.delta,
            p.x0.as_deref(),
            ctx.m,
            ctx.key(),
        ),
    )?;
    let mut t = Table::new(&[
        "delta",
        "empirical_moment",
        "half_width",
        "lipschitz",
        "input_moment",
        "bound",
        "holds",
    ]);
    t.push(vec![
        fmt_f64(check.delta),
        fmt_f64(check.empirical_moment),
        fmt_f64(check.empirical_hw),
        fmt_f64(check.lipschitz),
        fmt_opt(check.input_moment),
        fmt_opt(check.bound),
        check.holds.map(|h| h.to_string()).unwrap_or_default(),
    ]);
    ctx.csv("net_moment.csv".into(), &t)?;
    ctx.set("check", serde_json::to_value(&check)?);
    Ok(())
}

fn kriging_gap(ctx: &mut Ctx, p: &KrigingGapParams) -> Result<()> {
    let samples = stage(
        "kriging",
        kriging_surrogate_pair(&p.experiment, ctx.m, ctx.key()),
    )?;
    let models: Vec<Value> = samples
        .iter()
        .map(|s| Ok(json!({ "n": s.n, "model": serde_json::to_value(&s.model)? })))
        .collect::<Result<_>>()?;
    ctx.files
        .push(OutputFile::json("kriging_models.json", &models)?);
    let pairs: Vec<CoupledArrays<'_>> = samples
        .iter()
        .map(|s| CoupledArrays::new(s.n as u64, &s.x, &s.y))
        .collect();
    emit_gap_reports(ctx, "kriging_gap", &pairs, &p.r)
}

fn inequality_suite(ctx: &mut Ctx, p: &InequalityParams) -> Result<()> {
    let mut t = Table::new(&["family", "check", "r", "violations", "lhs", "rhs"]);
    let mut total = 0usize;
    let mut per_family = Map::new();
    for fam in &p.families {
        let (x, y) = match fam.innovation() {
            Some(spec) => (
                innovation_draws(&spec, ctx.m, ctx.key())?,
                innovation_draws(&spec, ctx.m, ctx.key().with_lane(LANE_SECONDARY))?,
            ),
            None => {
                let s = stage(
                    "ar1_processes",
                    simulate_pair(&Ar1Config::default(), 100, ctx.m, ctx.key()),
                )?;
                (s.x, s.y)
            }
        };
        let mut fam_total = 0usize;
        for &r in &p.r_pointwise {
            let v = stage("moment_gap", verify_pointwise_inequalities(&x, &y, r))?;
            fam_total += v;
            t.push(vec![
                fam.name().into(),
                "pointwise".into(),
                fmt_f64(r),
                v.to_string(),
                String::new(),
                String::new(),
            ]);
        }
        for &r in &p.r_cr {
            let v = stage("moment_gap", verify_cr_inequality(&x, &y, r))?;
            fam_total += v;
            t.push(vec![
                fam.name().into(),
                "c_r".into(),
                fmt_f64(r),
                v.to_string(),
                String::new(),
                String::new(),
            ]);
        }
        for &r in &p.r_minkowski {
            let c = stage("moment_gap", verify_minkowski_gap(&x, &y, r))?;
            let v = usize::from(!c.holds);
            fam_total += v;
            t.push(vec![
                fam.name().into(),
                "minkowski".into(),
                fmt_f64(r),
                v.to_string(),
                fmt_f64(c.lhs),
                fmt_f64(c.rhs),
            ]);
        }
        per_family.insert(fam.name().into(), json!(fam_total));
        total += fam_total;
    }
    ctx.csv("inequalities.csv".into(), &t)?;
    ctx.set("violations", Value::Object(per_family));
    ctx.set("total_violations", json!(total));
    Ok(())
}
