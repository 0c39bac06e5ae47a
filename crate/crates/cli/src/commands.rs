//! Subcommand bodies. Each builds a JSON record, writes it if asked, and
//! then enforces its numerical contract.

use std::path::Path;

use kummer_core::degeneration::{
    classify_limit, descriptor, emit_limit_cloud, fixed_point_convergence, limit_check, BoundaryPoint, DegenDescriptor, FibreEnd,
};
use kummer_core::kummer::{
    discover_coefficient_quintic, emit_cloud, fit_kummer_quartic, kummer_map, random_generic_taus, QuarticCache, QuinticParams,
};
use kummer_core::lattice::SiegelPoint;
use kummer_core::sampling::TorusSampler;
use kummer_core::sections::{odd_part, to_g_basis, verify_heisenberg_sections, SectionEvaluator};
use kummer_core::symmetry::verify_equivariance;
use kummer_core::theta::{theta2_detailed, ThetaConfig};
use serde_json::{json, Value};

use crate::input::{parse_characteristic, parse_complex, parse_z, read_tau, read_tau_list};
use crate::output::{c, cloud_csv, cloud_obj, cs, elliptic, finite_or_null, form_fit, record, tau_json, write_atomic, write_json};
use crate::{Basis, BoundaryArgs, Cli, DegenCmd, Failure, Group, KummerCmd, SectionsCmd, ThetaCmd, TrialArgs, VerifyCmd};

/// Section-level Heisenberg residual bound.
pub const SECTION_HEISENBERG_MAX: f64 = 1e-9;
/// Projective equivariance bound.
pub const EQUIVARIANCE_MAX: f64 = 1e-8;
pub const QUARTIC_RESIDUAL_MAX: f64 = 1e-8;
pub const INV_RESIDUAL_MAX: f64 = 1e-7;
pub const QUINTIC_RESIDUAL_MAX: f64 = 1e-6;
pub const LIMIT_DIST_MAX: f64 = 1e-8;
pub const FIXED_POINT_DIST_MAX: f64 = 1e-6;

pub fn run(cli: &Cli) -> Result<(), Failure> {
    let cfg = cli.theta_config()?;
    match &cli.command {
        Group::Theta(ThetaCmd::Eval { tau, characteristic, z }) => theta_eval(cli, &cfg, tau, characteristic, z),
        Group::Sections(SectionsCmd::Eval { tau, z, basis }) => sections_eval(cli, &cfg, tau, z, *basis),
        Group::Sections(SectionsCmd::VerifyHeisenberg(a)) => sections_heisenberg(cli, &cfg, a),
        Group::Verify(VerifyCmd::Heisenberg(a)) => verify_heisenberg(cli, &cfg, a),
        Group::Kummer(k) => kummer(cli, &cfg, k),
        Group::Degen(d) => degen(cli, &cfg, d),
    }
}

fn base_config(cli: &Cli) -> Value {
    json!({"tol": cli.tol, "max_radius": cli.max_radius})
}

fn with(mut base: Value, extra: Value) -> Value {
    if let (Value::Object(b), Value::Object(e)) = (&mut base, extra) {
        b.extend(e);
    }
    base
}

/// Writes the record to `out` if given; prints it when there is no file or
/// `--json` is set.
fn emit(cli: &Cli, out: Option<&Path>, rec: &Value, summary: &str) -> Result<(), Failure> {
    if let Some(p) = out {
        write_json(p, rec)?;
    }
    if cli.json || out.is_none() {
        println!("{}", serde_json::to_string_pretty(rec).expect("serializable"));
    } else {
        println!("{summary}");
    }
    Ok(())
}

fn check(ok: bool, what: &str, value: f64, bound: f64) -> Result<(), Failure> {
    if ok {
        Ok(())
    } else {
        Err(Failure::contract(format!("{what} = {value:e} violates bound {bound:e}")))
    }
}

fn theta_eval(cli: &Cli, cfg: &ThetaConfig, tau: &str, ch: &str, z: &str) -> Result<(), Failure> {
    let t = read_tau(tau)?;
    let ch = parse_characteristic(ch)?;
    let zz = parse_z(z).map_err(Failure::usage)?;
    let v = theta2_detailed(&ch, &t.matrix(), &zz, cfg)?;
    let rec = json!({"value": c(v.value), "radius": v.radius});
    if cli.json {
        let full = record("theta eval", with(base_config(cli), json!({"tau": tau_json(&t), "char": ch_string(&ch), "z": cs(&zz)})), rec);
        println!("{}", serde_json::to_string_pretty(&full).expect("serializable"));
    } else {
        println!("{rec}");
    }
    Ok(())
}

fn ch_string(ch: &kummer_core::theta::Characteristic) -> String {
    let [a1, a2] = ch.m_prime;
    let [b1, b2] = ch.m_dprime;
    format!("{a1},{a2},{b1},{b2}")
}

fn sections_eval(cli: &Cli, cfg: &ThetaConfig, tau: &str, z: &str, basis: Basis) -> Result<(), Failure> {
    let t = read_tau(tau)?;
    let zz = parse_z(z).map_err(Failure::usage)?;
    let eval = SectionEvaluator::new(&t, cfg)?;
    let s = eval.values(&zz)?;
    let values: Vec<_> = match basis {
        Basis::S => s.to_vec(),
        Basis::T => odd_part(&s).to_vec(),
        Basis::G => to_g_basis(&s).g.to_vec(),
    };
    let arr = cs(&values);
    if cli.json {
        let b = match basis {
            Basis::S => "s",
            Basis::T => "t",
            Basis::G => "g",
        };
        let full = record("sections eval", with(base_config(cli), json!({"tau": tau_json(&t), "z": cs(&zz), "basis": b})), arr);
        println!("{}", serde_json::to_string_pretty(&full).expect("serializable"));
    } else {
        println!("{arr}");
    }
    Ok(())
}

type Trials = (SectionEvaluator<f64>, Vec<[kummer_core::scalar::Cx<f64>; 2]>);

fn sample_points(t: &SiegelPoint<f64>, cfg: &ThetaConfig, trials: usize, seed: u64) -> Result<Trials, Failure> {
    if trials == 0 {
        return Err(Failure::usage("--trials must be at least 1"));
    }
    let eval = SectionEvaluator::new(t, cfg)?;
    let mut s = TorusSampler::new(&eval.period, seed);
    let zs = (0..trials).map(|_| s.next_z()).collect();
    Ok((eval, zs))
}

fn section_residuals_json(r: &kummer_core::sections::HeisenbergResiduals) -> Value {
    json!({
        "e1_half": r.e1_half,
        "e2_sixth": r.e2_sixth,
        "e3_half": r.e3_half,
        "e4_sixth": r.e4_sixth,
        "max": r.max(),
    })
}

fn sections_heisenberg(cli: &Cli, cfg: &ThetaConfig, a: &TrialArgs) -> Result<(), Failure> {
    let t = read_tau(&a.tau)?;
    let (eval, zs) = sample_points(&t, cfg, a.trials, a.seed)?;
    let r = verify_heisenberg_sections(&eval, &zs)?;
    let config = with(base_config(cli), json!({"tau": tau_json(&t), "trials": a.trials, "seed": a.seed}));
    let rec = record("sections verify-heisenberg", config, section_residuals_json(&r));
    emit(cli, a.out.as_deref(), &rec, &format!("max residual {:e}", r.max()))?;
    check(r.max() < SECTION_HEISENBERG_MAX, "section Heisenberg residual", r.max(), SECTION_HEISENBERG_MAX)
}

fn verify_heisenberg(cli: &Cli, cfg: &ThetaConfig, a: &TrialArgs) -> Result<(), Failure> {
    let t = read_tau(&a.tau)?;
    let (eval, zs) = sample_points(&t, cfg, a.trials, a.seed)?;
    let sec = verify_heisenberg_sections(&eval, &zs)?;
    let eq = verify_equivariance(&t, a.trials, a.seed, cfg)?;
    let generators: Vec<Value> = eq
        .half_periods
        .iter()
        .map(|(h, name, r)| json!({"translation": format!("e{}/2", h.index()), "generator": name.as_str(), "residual": r}))
        .collect();
    let result = json!({
        "sections": section_residuals_json(&sec),
        "generators": generators,
        "full_period": eq.full_period,
        "involution": eq.involution,
        "max_residual": eq.max_residual(),
    });
    let config = with(base_config(cli), json!({"tau": tau_json(&t), "trials": a.trials, "seed": a.seed}));
    let rec = record("verify heisenberg", config, result);
    let summary = format!("max projective residual {:e}, max section residual {:e}", eq.max_residual(), sec.max());
    emit(cli, a.out.as_deref(), &rec, &summary)?;
    check(sec.max() < SECTION_HEISENBERG_MAX, "section Heisenberg residual", sec.max(), SECTION_HEISENBERG_MAX)?;
    check(eq.max_residual() < EQUIVARIANCE_MAX, "projective equivariance residual", eq.max_residual(), EQUIVARIANCE_MAX)
}

fn kummer(cli: &Cli, cfg: &ThetaConfig, k: &KummerCmd) -> Result<(), Failure> {
    match k {
        KummerCmd::Map { tau, z } => {
            let t = read_tau(tau)?;
            let zz = parse_z(z).map_err(Failure::usage)?;
            let p = kummer_map(&t, &zz, cfg)?;
            let arr = cs(p.coords());
            if cli.json {
                let full = record("kummer map", with(base_config(cli), json!({"tau": tau_json(&t), "z": cs(&zz)})), arr);
                println!("{}", serde_json::to_string_pretty(&full).expect("serializable"));
            } else {
                println!("{arr}");
            }
            Ok(())
        }
        KummerCmd::Fit { tau, samples, seed, out } => {
            let t = read_tau(tau)?;
            let q = fit_kummer_quartic(&t, *samples, *seed, cfg)?;
            let mut result = form_fit(&q.fit);
            result["lambda"] = cs(&q.invariant.lambda);
            result["inv_residual"] = json!(q.inv_residual);
            let config = with(base_config(cli), json!({"tau": tau_json(&t), "samples": samples, "seed": seed}));
            let rec = record("kummer fit", config, result);
            let summary = format!("nullity {}, residual {:e}, inv_residual {:e}", q.fit.nullity, q.fit.residual, q.inv_residual);
            emit(cli, out.as_deref(), &rec, &summary)?;
            check(q.fit.residual < QUARTIC_RESIDUAL_MAX, "quartic held-out residual", q.fit.residual, QUARTIC_RESIDUAL_MAX)?;
            check(q.inv_residual < INV_RESIDUAL_MAX, "invariant projection residual", q.inv_residual, INV_RESIDUAL_MAX)
        }
        KummerCmd::QuinticDiscover { tau_list, samples_per_tau, seed, out } => {
            let (train, holdout) = read_tau_list(tau_list)?;
            let params = QuinticParams {
                samples_per_tau: *samples_per_tau,
                seed: *seed,
                ..QuinticParams::default()
            };
            let q = discover_coefficient_quintic(&train, &holdout, &params, &QuarticCache::new(), cfg)?;
            let mut result = form_fit(&q.fit);
            result["holdout_residual"] = json!(q.holdout_residual);
            result["max_inv_residual"] = json!(q.max_inv_residual);
            result["train_lambdas"] = Value::Array(q.train_lambdas.iter().map(|l| cs(l)).collect());
            result["holdout_lambdas"] = Value::Array(q.holdout_lambdas.iter().map(|l| cs(l)).collect());
            let config = with(
                base_config(cli),
                json!({"n_train": train.len(), "n_holdout": holdout.len(), "samples_per_tau": samples_per_tau, "seed": seed}),
            );
            let rec = record("kummer quintic-discover", config, result);
            let summary = format!("nullity {}, holdout residual {:e}", q.fit.nullity, q.holdout_residual);
            emit(cli, out.as_deref(), &rec, &summary)?;
            check(q.holdout_residual < QUINTIC_RESIDUAL_MAX, "quintic held-out residual", q.holdout_residual, QUINTIC_RESIDUAL_MAX)
        }
        KummerCmd::GenerateTaus { train, holdout, seed, out } => {
            let taus = random_generic_taus(train + holdout, *seed);
            let list = |s: &[SiegelPoint<f64>]| Value::Array(s.iter().map(tau_json).collect());
            let v = json!({"train": list(&taus[..*train]), "holdout": list(&taus[*train..])});
            write_json(out, &v)?;
            println!("wrote {} + {} taus to {}", train, holdout, out.display());
            Ok(())
        }
        KummerCmd::EmitCloud { tau, n, seed, out, obj } => {
            let t = read_tau(tau)?;
            let pts = emit_cloud(&t, *n, *seed, cfg)?;
            write_clouds(&pts, out, obj.as_deref())
        }
    }
}

fn write_clouds(pts: &[kummer_core::ProjPoint3], out: &Path, obj: Option<&Path>) -> Result<(), Failure> {
    write_atomic(out, cloud_csv(pts).as_bytes())?;
    let mut msg = format!("wrote {} points to {}", pts.len(), out.display());
    if let Some(o) = obj {
        let (text, kept) = cloud_obj(pts);
        write_atomic(o, text.as_bytes())?;
        msg.push_str(&format!(", {kept} vertices to {}", o.display()));
    }
    println!("{msg}");
    Ok(())
}

fn boundary(a: &BoundaryArgs) -> Result<BoundaryPoint, Failure> {
    let t2 = parse_complex(&a.tau2).map_err(|e| Failure::usage(format!("--tau2: {e}")))?;
    let t3 = parse_complex(&a.tau3).map_err(|e| Failure::usage(format!("--tau3: {e}")))?;
    BoundaryPoint::new(t2, t3).map_err(Failure::from)
}

fn boundary_json(u: &BoundaryPoint) -> Value {
    json!({"tau2": c(u.tau2), "tau3": c(u.tau3)})
}

fn descriptor_json(d: &DegenDescriptor) -> Value {
    json!({
        "base_modulus": c(d.base_modulus),
        "m_u_point": elliptic(&d.m_u_point),
        "gluing_e": elliptic(&d.gluing_e),
        "fixed_points": d.fixed_points.iter().map(|l| l.iter().map(elliptic).collect::<Vec<_>>()).collect::<Vec<_>>(),
        "m_u_trivial": d.m_u_trivial,
        "e_is_zero": d.e_is_zero,
        "two_e_is_zero": d.two_e_is_zero,
    })
}

fn end_str(e: FibreEnd) -> &'static str {
    match e {
        FibreEnd::Head => "head",
        FibreEnd::Tail => "tail",
    }
}

fn degen(cli: &Cli, cfg: &ThetaConfig, d: &DegenCmd) -> Result<(), Failure> {
    match d {
        DegenCmd::Descriptor { at, out } => {
            let u = boundary(at)?;
            let desc = descriptor(&u)?;
            let rec = record("degen descriptor", with(base_config(cli), boundary_json(&u)), descriptor_json(&desc));
            emit(cli, out.as_deref(), &rec, &format!("e_is_zero {}", desc.e_is_zero))
        }
        DegenCmd::Classify { at, samples, seed, out } => {
            let u = boundary(at)?;
            let cl = classify_limit(&u, *samples, *seed, cfg)?;
            let lines: Vec<Value> = cl
                .lines
                .iter()
                .map(|l| {
                    json!({
                        "end": end_str(l.end),
                        "fit": form_fit(&l.fit),
                        "span": [cs(l.span[0].coords()), cs(l.span[1].coords())],
                        "partner_residual": l.partner_residual,
                        "cover_degree": l.cover_degree,
                        "max_gradient": l.max_gradient,
                    })
                })
                .collect();
            let quartic = cl.quartic.as_ref().map(|q| {
                let mut v = form_fit(&q.fit);
                v["lambda"] = cs(&q.invariant.lambda);
                v["inv_residual"] = json!(q.inv_residual);
                v
            });
            let result = json!({
                "kind": cl.kind.as_str(),
                "descriptor": descriptor_json(&cl.descriptor),
                "quadric_fit": form_fit(&cl.quadric_fit),
                "quadric_rank": cl.quadric_rank,
                "quadric_singular_values": cl.quadric_singular_values,
                "quartic": quartic,
                "lines": lines,
                "skew_determinant": cl.skew_determinant.map(finite_or_null),
            });
            let config = with(with(base_config(cli), boundary_json(&u)), json!({"samples": samples, "seed": seed}));
            let rec = record("degen classify", config, result);
            emit(cli, out.as_deref(), &rec, cl.kind.as_str())
        }
        DegenCmd::LimitCheck { at, y, points, seed, out } => {
            let u = boundary(at)?;
            if !(y.is_finite() && *y > 0.0) {
                return Err(Failure::usage(format!("--Y must be positive, got {y}")));
            }
            if *points < 2 {
                return Err(Failure::usage("--points must be at least 2"));
            }
            let r = limit_check(&u, *y, points.div_ceil(2), *seed, cfg)?;
            let fp = fixed_point_convergence(&u, *y)?;
            let samples: Vec<Value> = r
                .samples
                .iter()
                .map(|(b, w1, z2, dist)| json!({"branch": b.index(), "w1": c(*w1), "z2": c(*z2), "dist": dist}))
                .collect();
            let result = json!({
                "y": r.y,
                "samples": samples,
                "max_dist": r.max_dist,
                "fixed_points": {
                    "max_w1": fp.max_w1,
                    "max_descriptor_dist": fp.max_descriptor_dist,
                    "pairs_match": fp.pairs_match,
                },
            });
            let config = with(with(base_config(cli), boundary_json(&u)), json!({"Y": y, "points": points, "seed": seed}));
            let rec = record("degen limit-check", config, result);
            let summary = format!("max limit distance {:e}, fixed-point distance {:e}", r.max_dist, fp.max_descriptor_dist);
            emit(cli, out.as_deref(), &rec, &summary)?;
            check(r.max_dist < LIMIT_DIST_MAX, "limit distance", r.max_dist, LIMIT_DIST_MAX)?;
            check(
                fp.pairs_match && fp.max_descriptor_dist < FIXED_POINT_DIST_MAX,
                "fixed-point descriptor distance",
                fp.max_descriptor_dist,
                FIXED_POINT_DIST_MAX,
            )
        }
        DegenCmd::EmitCloud { at, n, seed, out, obj } => {
            let u = boundary(at)?;
            let pts = emit_limit_cloud(&u, *n, *seed, cfg)?;
            write_clouds(&pts, out, obj.as_deref())
        }
    }
}
