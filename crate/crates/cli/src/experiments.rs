//! The nine experiments. Random inputs are drawn sequentially from one seeded
//! ChaCha8 stream, so results depend only on the config and seed.

use std::f64::consts::PI;
use std::sync::Arc;

use faer::Mat;
use magframe::bounds::{boundedness_experiment, decay_table, fit_decay, schur_bound, super_schur_bound, WeightTuple};
use magframe::frame::{random_wavefunction, FrameId, FrameSpec};
use magframe::geometry::{PhasePoint, PhaseSpaceGrid, UniformGrid};
use magframe::io::fmt_f64;
use magframe::magnetics::{gauge_shift, GaugeFunction, Polynomial, VectorPotential};
use magframe::matrixrep::{
    apply_super_via_elements, compose_super_elements, hs_isometry_check, op_matrix_elements, reconstruct_operator,
    super_element_trace_form, SuperMap,
};
use magframe::superweyl::{gaussian_bump, DirectQuadrature, DirectRoute, DoubleSymbol, SuperOperator, SCHMIDT_TOLERANCE};
use magframe::weyl::{
    dequantize, multiplication_operator, quadrature_kernel, quantize, random_hs_operator, random_schwartz_symbol,
    OperatorMatrix, Symbol,
};
use magframe::C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::config::{ConfigError, Experiment, ExperimentConfig, FamilySpec};
use crate::{Check, Outcome, RunError, Table};

type Res = Result<Outcome, RunError>;

pub(crate) fn run(cfg: &ExperimentConfig) -> Res {
    log::info!("running {} (d = {}, seed = {})", cfg.experiment, cfg.dimension, cfg.seed);
    match cfg.experiment {
        Experiment::VerifyFrame => verify_frame(cfg),
        Experiment::QuantizeRoundtrip => quantize_roundtrip(cfg),
        Experiment::GaugeCovariance => gauge_covariance(cfg),
        Experiment::HsIsometry => hs_isometry(cfg),
        Experiment::ProductFormulas => product_formulas(cfg),
        Experiment::SuperDecay => super_decay(cfg),
        Experiment::Boundedness => boundedness(cfg),
        Experiment::Liouville => liouville(cfg),
        Experiment::SchurDemo => schur_demo(cfg),
    }
}

fn rng(cfg: &ExperimentConfig) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(cfg.seed)
}

fn f(x: f64) -> String {
    fmt_f64(x)
}

fn max(v: impl IntoIterator<Item = f64>) -> f64 {
    // NaN propagates so that it fails the check.
    v.into_iter().fold(0.0, |a: f64, b| if b.is_nan() || a.is_nan() { f64::NAN } else { a.max(b) })
}

/// Potentials with a label unique within the config.
fn potentials(cfg: &ExperimentConfig) -> Result<Vec<(String, VectorPotential)>, RunError> {
    cfg.potentials
        .iter()
        .enumerate()
        .map(|(i, p)| Ok((format!("{}{}", p.label(), i), p.build(cfg.dimension)?)))
        .collect()
}

fn families(cfg: &ExperimentConfig, grid: PhaseSpaceGrid) -> Result<Vec<(String, DoubleSymbol)>, RunError> {
    cfg.families
        .iter()
        .enumerate()
        .map(|(i, s)| Ok((format!("{}{}", s.label(), i), s.build(grid)?)))
        .collect()
}

fn ids_row(ids: &[FrameId; 4]) -> Vec<String> {
    ids.iter().flat_map(|id| id.alpha.0.iter().chain(&id.k.0).map(|v| v.to_string())).collect()
}

fn ids_header(d: usize) -> Vec<String> {
    let mut h = Vec::new();
    for side in ["alpha_l", "beta_l", "alpha_r", "beta_r"] {
        for part in ["lattice", "k"] {
            for j in 1..=d {
                h.push(format!("{side}_{part}_{j}"));
            }
        }
    }
    h
}

/// Random octuple near the diagonal: left and right pairs differ by at most one
/// lattice step and one modulation step per axis.
fn random_octuple(spec: &FrameSpec, rng: &mut impl Rng) -> [FrameId; 4] {
    let d = spec.dim();
    let (n, k) = (spec.lattice_truncation() as i64, spec.modulation_truncation() as i64);
    let (n0, k0) = (n.min(1), k.min(2));
    let mut pair = || {
        let alpha: Vec<i64> = (0..d).map(|_| rng.gen_range(-n0..=n0)).collect();
        let kk: Vec<i64> = (0..d).map(|_| rng.gen_range(-k0..=k0)).collect();
        let beta: Vec<i64> = alpha.iter().map(|a| (a + rng.gen_range(-1..=1)).clamp(-n, n)).collect();
        let kb: Vec<i64> = kk.iter().map(|a| (a + rng.gen_range(-1..=1)).clamp(-k, k)).collect();
        (FrameId::new(alpha, kk).expect("dim"), FrameId::new(beta, kb).expect("dim"))
    };
    let (al, bl) = pair();
    let (ar, br) = pair();
    [al, bl, ar, br]
}

fn verify_frame(cfg: &ExperimentConfig) -> Res {
    let grid = cfg.position_grid()?;
    let mut rng = rng(cfg);
    let psis: Vec<_> = (0..cfg.trials).map(|_| random_wavefunction(grid, cfg.spread, &mut rng)).collect();
    let tol = cfg.tolerance("parseval");
    let mut table = Table::new("parseval", &["potential", "trial", "defect", "safe_box_leakage"]);
    let mut checks = Vec::new();
    let mut summary = serde_json::Map::new();
    for (label, a) in potentials(cfg)? {
        let spec = cfg.frame_spec(&a)?;
        let mut worst: f64 = 0.0;
        for (t, psi) in psis.iter().enumerate() {
            let defect = spec.parseval_defect(psi)?;
            worst = max([worst, defect]);
            table.push(vec![label.clone(), t.to_string(), f(defect), f(spec.safe_box_leakage(psi))]);
        }
        summary.insert(label.clone(), json!({ "max_parseval_defect": worst }));
        checks.push(Check::le(format!("parseval_defect[d={}, {label}]", cfg.dimension), Some(1), worst, tol));
    }
    Ok(Outcome { checks, tables: vec![table], summary: summary.into() })
}

fn quantize_roundtrip(cfg: &ExperimentConfig) -> Res {
    let grid = PhaseSpaceGrid::new(cfg.position_grid()?);
    let d = cfg.dimension as i32;
    let mut rng = rng(cfg);
    let symbols: Vec<Symbol> = (0..cfg.trials).map(|_| random_schwartz_symbol(grid, cfg.spread, &mut rng)).collect();
    let closed_form = (2.0 * PI).powf(-(d as f64) / 2.0);
    let mut table = Table::new("roundtrip", &["potential", "trial", "roundtrip_error", "hs_ratio", "oracle_ratio"]);
    let mut checks = Vec::new();
    let (mut rt, mut oracle_err, mut ratios) = (0.0, 0.0, Vec::new());
    let mut summary = serde_json::Map::new();
    for (label, a) in potentials(cfg)? {
        let id = quantize(&a, &Symbol::constant(grid, C64::new(1.0, 0.0)))?;
        let id_err = id.rel_hs_distance(&OperatorMatrix::identity(*grid.position()))?;
        checks.push(Check::le(format!("identity_kernel[{label}]"), Some(2), id_err, cfg.tolerance("identity")));
        for (t, s) in symbols.iter().enumerate() {
            let k = quantize(&a, s)?;
            let back = dequantize(&a, &k)?;
            let e = back.samples().rel_distance(s.samples())?;
            let ratio = k.hs_norm() / s.norm();
            let oracle = quadrature_kernel(&a, s)?.hs_norm() / s.norm();
            rt = max([rt, e]);
            oracle_err = max([oracle_err, (oracle - ratio).abs() / ratio]);
            ratios.push(ratio);
            table.push(vec![label.clone(), t.to_string(), f(e), f(ratio), f(oracle)]);
        }
        summary.insert(label, json!({ "identity_error": id_err }));
    }
    let (lo, hi) = ratios.iter().fold((f64::INFINITY, 0.0f64), |(l, h), r| (l.min(*r), h.max(*r)));
    let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
    let spread = (hi - lo) / mean;
    let closed = (mean - closed_form).abs() / closed_form;
    checks.push(Check::le("roundtrip_error", Some(2), rt, cfg.tolerance("roundtrip")));
    checks.push(Check::le("hs_ratio_relative_spread", Some(3), spread, cfg.tolerance("ratio_spread")));
    checks.push(Check::le("hs_ratio_vs_quadrature_oracle", Some(3), oracle_err, cfg.tolerance("oracle")));
    checks.push(Check::le("hs_ratio_vs_(2pi)^(-d/2)", Some(3), closed, cfg.tolerance("oracle")));
    summary.insert("hs_ratio_mean".into(), json!(mean));
    Ok(Outcome { checks, tables: vec![table], summary: summary.into() })
}

/// Random real polynomial of degree 2 without constant term.
fn random_gauge(d: usize, rng: &mut impl Rng) -> magframe::Result<GaugeFunction> {
    let count = if d == 1 { 3 } else { 6 };
    let mut c: Vec<f64> = (0..count).map(|_| rng.gen_range(-0.3..=0.3)).collect();
    c[0] = 0.0;
    GaugeFunction::new(Polynomial::new(d, c)?)
}

fn gauge_covariance(cfg: &ExperimentConfig) -> Res {
    let grid = PhaseSpaceGrid::new(cfg.position_grid()?);
    let mut rng = rng(cfg);
    let mut table = Table::new("covariance", &["potential", "trial", "hs_error"]);
    let mut checks = Vec::new();
    for (label, a) in potentials(cfg)? {
        let mut worst: f64 = 0.0;
        for t in 0..cfg.trials {
            let s = random_schwartz_symbol(grid, cfg.spread, &mut rng);
            let phi = random_gauge(cfg.dimension, &mut rng)?;
            let lhs = quantize(&gauge_shift(&a, &phi)?, &s)?;
            let u = multiplication_operator(*grid.position(), |x| C64::from_polar(1.0, phi.eval(x)));
            let rhs = u.compose(&quantize(&a, &s)?)?.compose(&u.adjoint())?;
            let e = lhs.rel_hs_distance(&rhs)?;
            worst = max([worst, e]);
            table.push(vec![label.clone(), t.to_string(), f(e)]);
        }
        checks.push(Check::le(format!("gauge_covariance[{label}]"), Some(4), worst, cfg.tolerance("covariance")));
    }
    Ok(Outcome { checks, tables: vec![table], summary: json!({}) })
}

fn hs_isometry(cfg: &ExperimentConfig) -> Res {
    let grid = cfg.position_grid()?;
    let mut rng = rng(cfg);
    let ops: Vec<_> = (0..cfg.trials).map(|_| random_hs_operator(grid, cfg.spread, &mut rng)).collect();
    let mut table = Table::new("isometry", &["potential", "trial", "hs_norm", "l2_norm", "defect", "reconstruction", "leakage"]);
    let mut checks = Vec::new();
    for (label, a) in potentials(cfg)? {
        let spec = Arc::new(cfg.frame_spec(&a)?);
        let (mut iso, mut rec): (f64, f64) = (0.0, 0.0);
        for (t, op) in ops.iter().enumerate() {
            let defect = hs_isometry_check(&spec, op)?;
            let e = op_matrix_elements(&spec, op)?;
            let r = reconstruct_operator(&e)?.rel_hs_distance(op)?;
            iso = max([iso, defect]);
            rec = max([rec, r]);
            table.push(vec![label.clone(), t.to_string(), f(op.hs_norm()), f(e.norm()), f(defect), f(r), f(e.leakage)]);
        }
        checks.push(Check::le(format!("hs_isometry_defect[{label}]"), Some(5), iso, cfg.tolerance("isometry")));
        checks.push(Check::le(format!("operator_reconstruction[{label}]"), None, rec, cfg.tolerance("reconstruction")));
    }
    Ok(Outcome { checks, tables: vec![table], summary: json!({}) })
}

fn product_formulas(cfg: &ExperimentConfig) -> Res {
    let grid = PhaseSpaceGrid::new(cfg.position_grid()?);
    let pos = *grid.position();
    let mut rng = rng(cfg);
    let sym = |rng: &mut ChaCha8Rng| random_schwartz_symbol(grid, cfg.spread, rng);
    let (fl, fr) = (sym(&mut rng), sym(&mut rng));
    let product = DoubleSymbol::product(fl.clone(), fr.clone())?;
    let rank5 = DoubleSymbol::separable(
        (0..5)
            .map(|_| {
                let w = C64::from_polar(rng.gen_range(0.2..1.0), rng.gen_range(0.0..2.0 * PI));
                (w, sym(&mut rng), sym(&mut rng))
            })
            .collect(),
    )?;
    let gs: Vec<_> = (0..cfg.trials).map(|_| random_hs_operator(pos, cfg.spread, &mut rng)).collect();
    let octuple_seed: u64 = rng.gen();

    let mut contractions = Table::new("contractions", &["potential", "case", "trial", "relative_error"]);
    let mut fact_header = vec!["potential".to_string()];
    fact_header.extend(ids_header(cfg.dimension));
    fact_header.extend(["schmidt_re", "schmidt_im", "dense_re", "dense_im", "factored_re", "factored_im"].map(String::from));
    let mut factor = Table { name: "factorization".into(), header: fact_header, rows: Vec::new() };
    let mut checks = Vec::new();
    let mut summary = serde_json::Map::new();
    for (label, a) in potentials(cfg)? {
        let spec = Arc::new(cfg.frame_spec(&a)?);
        let sp = SuperOperator::new(&a, &product, SCHMIDT_TOLERANCE)?;
        let s5 = SuperOperator::new(&a, &rank5, SCHMIDT_TOLERANCE)?;
        let ep = Arc::new(sp.matrix_elements(&spec)?);
        let e5 = Arc::new(s5.matrix_elements(&spec)?);
        let composed = compose_super_elements(&ep, &e5)?;
        let (mut l1, mut l2): (f64, f64) = (0.0, 0.0);
        for (t, g) in gs.iter().enumerate() {
            let ge = op_matrix_elements(&spec, g)?;
            for (case, s, e) in [("product", &sp, &ep), ("rank5", &s5, &e5)] {
                let got = apply_super_via_elements(e, &ge)?;
                let want = op_matrix_elements(&spec, &s.apply(g)?)?;
                let err = got.rel_distance(&want)?;
                l1 = max([l1, err]);
                contractions.push(vec![label.clone(), format!("apply-{case}"), t.to_string(), f(err)]);
            }
            let got = apply_super_via_elements(&composed, &ge)?;
            let want = op_matrix_elements(&spec, &sp.apply(&s5.apply(g)?)?)?;
            let err = got.rel_distance(&want)?;
            l2 = max([l2, err]);
            contractions.push(vec![label.clone(), "compose-product-after-rank5".into(), t.to_string(), f(err)]);
        }
        checks.push(Check::le(format!("contraction_apply[{label}]"), Some(6), l1, cfg.tolerance("contraction")));
        checks.push(Check::le(format!("contraction_compose[{label}]"), Some(6), l2, cfg.tolerance("contraction")));

        // Factorization: Schmidt route and dense trace form against single-operator elements.
        let (opl, opr) = (quantize(&a, &fl)?, quantize(&a, &fr)?);
        let (el, er) = (op_matrix_elements(&spec, &opl)?, op_matrix_elements(&spec, &opr)?);
        let map: SuperMap = {
            let (opl, opr) = (opl.clone(), opr.clone());
            Arc::new(move |g| opl.compose(g)?.compose(&opr))
        };
        let mut orng = ChaCha8Rng::seed_from_u64(octuple_seed);
        let mut vals = Vec::new();
        for _ in 0..50 {
            let ids = random_octuple(&spec, &mut orng);
            let s = ep.element_ids(&ids)?;
            let dense = super_element_trace_form(&spec, &map, &ids)?;
            let fac = el.get(&ids[0], &ids[1])? * er.get(&ids[2], &ids[3])?;
            let mut row = vec![label.clone()];
            row.extend(ids_row(&ids));
            row.extend([s.re, s.im, dense.re, dense.im, fac.re, fac.im].map(f));
            factor.push(row);
            vals.push((s, dense, fac));
        }
        let scale = max(vals.iter().map(|v| v.2.norm()));
        let err = max(vals.iter().map(|(s, d, c)| (s - c).norm().max((d - c).norm()) / scale));
        checks.push(Check::le(format!("super_factorization[{label}]"), Some(7), err, cfg.tolerance("factorization")));
        summary.insert(label, json!({ "rank5_schmidt_rank": s5.rank(), "apply": l1, "compose": l2 }));
    }
    Ok(Outcome { checks, tables: vec![contractions, factor], summary: summary.into() })
}

fn super_decay(cfg: &ExperimentConfig) -> Res {
    let grid = PhaseSpaceGrid::new(cfg.position_grid()?);
    let mut rng = rng(cfg);
    let weights = WeightTuple::grid(cfg.weight_max);
    let boxes: Vec<(usize, usize)> = cfg.boxes.iter().map(|b| (b[0], b[1])).collect();
    let dc = cfg.direct;
    let dgrid = PhaseSpaceGrid::new(UniformGrid::new(1, dc.half_width, dc.points)?);
    let quad = DirectQuadrature { half_width: dc.quadrature_half_width, points: dc.quadrature_points };

    let mut tables = Vec::new();
    let mut verdicts =
        Table::new("verdicts", &["potential", "family", "n_l", "n_r", "ns_l", "ns_r", "relative_change", "verdict"]);
    let mut dh = vec!["potential".to_string(), "family".to_string()];
    dh.extend(ids_header(1));
    dh.extend(["schmidt_re", "schmidt_im", "direct_re", "direct_im"].map(String::from));
    let mut direct = Table { name: "direct".into(), header: dh, rows: Vec::new() };
    let mut checks = Vec::new();
    let mut summary = serde_json::Map::new();
    for (label, a) in potentials(cfg)? {
        let spec = Arc::new(cfg.frame_spec(&a)?);
        let dspec = Arc::new(FrameSpec::new(*dgrid.position(), dc.lattice, dc.modulation, a.clone())?);
        let octuples: Vec<_> = (0..dc.octuples).map(|_| random_octuple(&dspec, &mut rng)).collect();
        for ((name, fam), (_, dfam)) in families(cfg, grid)?.into_iter().zip(families(cfg, dgrid)?) {
            let report = decay_table(&a, &fam, &spec, &weights, &boxes)?;
            let mut t = Table::new(
                format!("decay_{label}_{name}"),
                &["n_l", "n_r", "ns_l", "ns_r", "m_l", "m_r", "n_box", "k_box", "sup"],
            );
            for row in &report.rows {
                let w = row.weight;
                for (b, sup) in report.boxes.iter().zip(&row.sups) {
                    t.push(vec![
                        w.n_l.to_string(),
                        w.n_r.to_string(),
                        w.ns_l.to_string(),
                        w.ns_r.to_string(),
                        f(w.m_l),
                        f(w.m_r),
                        b.0.to_string(),
                        b.1.to_string(),
                        f(*sup),
                    ]);
                }
            }
            tables.push(t);
            let k = report.boxes.len();
            let mut worst: f64 = 0.0;
            for (row, v) in report.rows.iter().zip(fit_decay(&report)?) {
                let (prev, last) = (row.sups[k - 2], row.sups[k - 1]);
                let change = if last == 0.0 { 0.0 } else { (last - prev).abs() / last.abs() };
                worst = max([worst, change]);
                let w = row.weight;
                verdicts.push(vec![
                    label.clone(),
                    name.clone(),
                    w.n_l.to_string(),
                    w.n_r.to_string(),
                    w.ns_l.to_string(),
                    w.ns_r.to_string(),
                    f(change),
                    if v.is_saturating() { "saturating" } else { "growing" }.into(),
                ]);
            }
            let non_monotone = report.rows.iter().filter(|r| !r.monotone).count();
            checks.push(Check::le(
                format!("decay_saturation[{label}, {name}]"),
                Some(9),
                worst,
                cfg.tolerance("saturation"),
            ));
            checks.push(Check::le(format!("decay_sups_nondecreasing[{label}, {name}]"), None, non_monotone as f64, 0.0));

            // Direct oscillatory route against the Schmidt route.
            let elems = SuperOperator::new(&a, &dfam, SCHMIDT_TOLERANCE)?.matrix_elements(&dspec)?;
            let route = DirectRoute::new(&dfam, quad)?;
            let (mut num, mut den) = (0.0, 0.0);
            for ids in &octuples {
                let s = elems.element_ids(ids)?;
                let dv = route.element(&dspec, ids)?;
                num += (s - dv).norm_sqr();
                den += s.norm_sqr();
                let mut row = vec![label.clone(), name.clone()];
                row.extend(ids_row(ids));
                row.extend([s.re, s.im, dv.re, dv.im].map(f));
                direct.push(row);
            }
            let rel = if den > 0.0 { (num / den).sqrt() } else { num.sqrt() };
            checks.push(Check::le(format!("direct_vs_schmidt[{label}, {name}]"), Some(11), rel, cfg.tolerance("direct")));
            summary.insert(format!("{label}/{name}"), json!({ "max_relative_change": worst, "direct_relative_error": rel }));
        }
    }
    tables.push(verdicts);
    tables.push(direct);
    Ok(Outcome { checks, tables, summary: summary.into() })
}

fn boundedness(cfg: &ExperimentConfig) -> Res {
    let grid = PhaseSpaceGrid::new(cfg.position_grid()?);
    let mut rng = rng(cfg);
    let boxes: Vec<(usize, usize)> = cfg.boxes.iter().map(|b| (b[0], b[1])).collect();
    let mut ratios = Table::new("ratios", &["potential", "family", "trial", "hs_in", "hs_out", "ratio"]);
    let mut schur = Table::new(
        "schur",
        &["potential", "family", "n_box", "k_box", "row_sup", "col_sup", "constant", "norm_estimate"],
    );
    let mut checks = Vec::new();
    let mut summary = serde_json::Map::new();
    for (label, a) in potentials(cfg)? {
        let spec = Arc::new(cfg.frame_spec(&a)?);
        let all = (spec.lattice_truncation(), spec.modulation_truncation());
        for ((name, fam), fspec) in families(cfg, grid)?.into_iter().zip(&cfg.families) {
            let r = boundedness_experiment(&a, &fam, &spec, cfg.trials, cfg.spread, &boxes, &mut rng)?;
            for (t, tr) in r.trials.iter().enumerate() {
                ratios.push(vec![label.clone(), name.clone(), t.to_string(), f(tr.hs_in), f(tr.hs_out), f(tr.ratio)]);
            }
            for ((n, k), c) in &r.box_constants {
                schur.push(vec![label.clone(), name.clone(), n.to_string(), k.to_string(), String::new(), String::new(), f(*c), String::new()]);
            }
            let s = &r.schur;
            schur.push(vec![
                label.clone(),
                name.clone(),
                all.0.to_string(),
                all.1.to_string(),
                f(s.row_sup),
                f(s.col_sup),
                f(s.constant),
                f(s.norm_estimate),
            ]);
            let excess = if s.constant.is_finite() { r.max_ratio - s.constant } else { f64::INFINITY };
            checks.push(Check::le(
                format!("hs_ratio_minus_schur_constant[{label}, {name}]"),
                Some(10),
                excess,
                cfg.tolerance("dominance"),
            ));
            let change = if s.constant.is_finite() { r.schur_change } else { f64::INFINITY };
            checks.push(Check::le(
                format!("schur_constant_box_change[{label}, {name}]"),
                Some(10),
                change,
                cfg.tolerance("stability"),
            ));
            checks.push(Check::le(
                format!("norm_estimate_minus_schur_constant[{label}, {name}]"),
                None,
                s.norm_estimate - s.constant,
                cfg.tolerance("dominance"),
            ));
            if let FamilySpec::Constant { value } = fspec {
                checks.push(Check::le(
                    format!("identity_ratio[{label}, {name}]"),
                    None,
                    (r.max_ratio - value.abs()).abs(),
                    cfg.tolerance("dominance"),
                ));
            }
            summary.insert(
                format!("{label}/{name}"),
                json!({ "max_ratio": r.max_ratio, "schur_constant": s.constant, "schur_change": r.schur_change }),
            );
        }
    }
    Ok(Outcome { checks, tables: vec![ratios, schur], summary: summary.into() })
}

fn liouville(cfg: &ExperimentConfig) -> Res {
    let grid = PhaseSpaceGrid::new(cfg.position_grid()?);
    let d = cfg.dimension;
    let mut rng = rng(cfg);
    let rhos: Vec<_> = (0..cfg.trials).map(|_| random_hs_operator(*grid.position(), cfg.spread, &mut rng)).collect();
    let mut table = Table::new("liouville", &["potential", "family", "trial", "residual", "ratio", "commutator_bound"]);
    let mut checks = Vec::new();
    for (label, a) in potentials(cfg)? {
        for (i, fam) in cfg.families.iter().enumerate() {
            let FamilySpec::Liouville { width, amplitude } = fam else {
                return Err(RunError::Config(ConfigError::Invalid(format!(
                    "families: the liouville experiment needs kind = \"liouville\", got \"{}\"",
                    fam.label()
                ))));
            };
            let name = format!("{}{i}", fam.label());
            let h = gaussian_bump(grid, &PhasePoint::origin(d), *width).scaled(C64::new(*amplitude, 0.0));
            let op = SuperOperator::new(&a, &fam.build(grid)?, SCHMIDT_TOLERANCE)?;
            let oph = quantize(&a, &h)?;
            let bound = 2.0 * oph.operator_norm(100);
            let (mut res, mut excess): (f64, f64) = (0.0, f64::NEG_INFINITY);
            for (t, rho) in rhos.iter().enumerate() {
                let lhs = op.apply(rho)?;
                let comm = oph.compose(rho)?.axpy(C64::new(-1.0, 0.0), &rho.compose(&oph)?)?;
                let r = lhs.axpy(C64::new(0.0, 1.0), &comm)?.hs_norm() / rho.hs_norm();
                let ratio = lhs.hs_norm() / rho.hs_norm();
                res = max([res, r]);
                excess = excess.max(ratio - bound);
                table.push(vec![label.clone(), name.clone(), t.to_string(), f(r), f(ratio), f(bound)]);
            }
            checks.push(Check::le(format!("liouville_identity[{label}, {name}]"), Some(8), res, cfg.tolerance("liouville")));
            checks.push(Check::le(
                format!("ratio_minus_commutator_bound[{label}, {name}]"),
                None,
                excess,
                cfg.tolerance("commutator_bound"),
            ));
        }
    }
    Ok(Outcome { checks, tables: vec![table], summary: json!({}) })
}

fn schur_demo(cfg: &ExperimentConfig) -> Res {
    let grid = PhaseSpaceGrid::new(cfg.position_grid()?);
    let mut rng = rng(cfg);
    let tol = cfg.tolerance("schur");
    let mut table = Table::new("schur", &["case", "size", "row_sup", "col_sup", "constant", "norm_estimate"]);
    let push = |t: &mut Table, case: String, size: usize, r: &magframe::bounds::SchurReport| {
        t.push(vec![case, size.to_string(), f(r.row_sup), f(r.col_sup), f(r.constant), f(r.norm_estimate)]);
    };
    let mut checks = Vec::new();
    let one = C64::new(1.0, 0.0);
    let id = schur_bound(&Mat::<C64>::identity(4, 4))?;
    let perm = schur_bound(&Mat::from_fn(2, 2, |i, j| if i != j { one } else { C64::new(0.0, 0.0) }))?;
    push(&mut table, "identity".into(), 4, &id);
    push(&mut table, "permutation".into(), 2, &perm);
    for (name, r) in [("identity", &id), ("permutation", &perm)] {
        let e = (r.constant - 1.0).abs().max((r.norm_estimate - 1.0).abs());
        checks.push(Check::le(format!("{name}_constant_and_norm"), None, e, tol));
    }
    let mut excess = f64::NEG_INFINITY;
    for t in 0..cfg.trials {
        let n = rng.gen_range(5..=40);
        let m = Mat::from_fn(n, n, |_, _| C64::new(rng.gen_range(0.0..1.0), 0.0));
        let r = schur_bound(&m)?;
        excess = excess.max((r.norm_estimate - r.constant) / r.constant);
        push(&mut table, format!("random{t}"), n, &r);
    }
    checks.push(Check::le("random_nonnegative_norm_minus_constant", None, excess, tol));
    for (label, a) in potentials(cfg)? {
        let spec = Arc::new(cfg.frame_spec(&a)?);
        let all: Vec<usize> = (0..spec.len()).collect();
        for (name, fam) in families(cfg, grid)? {
            let op = SuperOperator::new(&a, &fam, SCHMIDT_TOLERANCE)?;
            let structured = super_schur_bound(&op.matrix_elements(&spec)?, &all)?;
            let dense = super_schur_bound(&op.matrix_elements(&spec)?.into_lazy(), &all)?;
            push(&mut table, format!("{label}/{name}/structured"), all.len(), &structured);
            push(&mut table, format!("{label}/{name}/flattened"), all.len(), &dense);
            let agree = (structured.constant - dense.constant).abs() / dense.constant;
            let norms = (structured.norm_estimate - dense.norm_estimate).abs() / dense.norm_estimate;
            checks.push(Check::le(format!("structured_vs_flattened[{label}, {name}]"), None, agree.max(norms), tol));
            checks.push(Check::le(
                format!("norm_minus_constant[{label}, {name}]"),
                None,
                (dense.norm_estimate - dense.constant) / dense.constant,
                tol,
            ));
        }
    }
    Ok(Outcome { checks, tables: vec![table], summary: json!({}) })
}
