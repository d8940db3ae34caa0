use std::path::Path;

use num_traits::Zero;
use serde_json::{json, Value};

use equistate::measure::{pushforward, wasserstein, wasserstein_any, AnyMeasure, FiniteMeasure};
use equistate::numerics::{format_rational, parse_rational, BallReal, BigRational, DirectedReal, Direction, Dyadic, Round};
use equistate::ratmap::{certified_roots, parse_poly, RationalMap, RootCluster};
use equistate::sphere::{ideal_enumerate, SpherePoint};
use equistate::thermo::{self, backward_orbit_measure, birkhoff_sum, select_anchor, Potential, PressureOptions};
use equistate::thurston::{mme_tile_measure, RuleName, SubdivisionMap, TileComplex, TilePoint};
use equistate::verify::{
    atom_mesh, hat_family, invariance_residual, jacobian_unitarity, membership_residual, rokhlin_lower_bound,
    tangent_certificate, JacobianSpec, PatchSystem, SpherePatches, TangentOutcome, TilePatches,
};
use equistate::Error;

use crate::args::{Check, Command, Mode, Output, Target};
use crate::{Failure, Outcome};

type Res<T> = Result<T, Failure>;

fn q(s: &str, flag: &str) -> Res<BigRational> {
    parse_rational(s).map_err(|e| Failure::Usage(format!("--{flag}: {e}")))
}

fn ball_json(b: &BallReal) -> Value {
    json!({
        "approx": b.mid.to_f64(),
        "radius": b.rad.to_f64(),
        "mid": format_rational(&b.mid.to_rational()),
        "rad": format_rational(&b.rad.to_rational()),
    })
}

fn cluster_json(c: &RootCluster) -> Value {
    let p = c.center();
    let (re, im) = match &p {
        SpherePoint::Finite(z) => z.to_f64(),
        SpherePoint::Infinity => (f64::INFINITY, 0.0),
    };
    json!({
        "point": p,
        "chart": c.point.chart,
        "chart_center": c.point.center.to_string(),
        "chart_radius": c.point.radius.to_f64(),
        "chordal_radius": c.point.chordal_radius().to_f64(),
        "multiplicity": c.multiplicity,
        "approx": [re, im],
    })
}

fn read_json(path: &Path) -> Res<Value> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::Lib(Error::Parse(format!("{}: {e}", path.display()))))
}

fn read_measure(path: &Path) -> Res<AnyMeasure> {
    Ok(AnyMeasure::from_json(&read_json(path)?)?)
}

enum Dyn {
    Map(RationalMap),
    Rule(SubdivisionMap),
}

fn resolve(t: &Target) -> Res<Dyn> {
    match (&t.map, &t.rule) {
        (Some(m), None) => Ok(Dyn::Map(m.parse()?)),
        (None, Some(r)) => Ok(Dyn::Rule(SubdivisionMap::get(r.parse::<RuleName>()?))),
        _ => Err(Failure::Usage("exactly one of --map and --rule is required".into())),
    }
}

fn target_json(t: &Target) -> Value {
    json!({"map": t.map, "rule": t.rule})
}

pub fn run(cmd: Command) -> (Res<Outcome>, Output) {
    match cmd {
        Command::Pressure { map, potential, alpha, r, c0, visual_constant, n, mode, output } => {
            (pressure(&map, &potential, &alpha, r.as_deref(), c0.as_deref(), &visual_constant, n, mode), output)
        }
        Command::Mme { target, potential, depth, anchor, output } => (mme(&target, &potential, depth, anchor.as_deref()), output),
        Command::Verify { check } => run_check(check),
        Command::Roots { poly, bits, output } => (roots(&poly, bits), output),
        Command::Preimages { map, point, bits, output } => (preimages(&map, &point, bits), output),
        Command::Wasserstein { mu, nu, n, output } => (transport(&mu, &nu, n), output),
        Command::Tiles { rule, level, output } => (tiles(&rule, level), output),
        Command::Birkhoff { map, potential, point, steps, n, output } => (birkhoff(&map, &potential, &point, steps, n), output),
    }
}

fn run_check(check: Check) -> (Res<Outcome>, Output) {
    match check {
        Check::Jacobian { map, j, points, tol, n, output } => (check_jacobian(&map, &j, points, &tol, n), output),
        Check::Membership { measure, target, j, centers, widths, tol, n, output } => {
            (check_membership(&measure, &target, &j, centers, &widths, &tol, n), output)
        }
        Check::Tangent { measure, phi, witnesses, p_lower, tol, n, output } => {
            (check_tangent(&measure, &phi, &witnesses, &p_lower, &tol, n), output)
        }
        Check::Rokhlin { measure, target, j, n, output } => (check_rokhlin(&measure, &target, &j, n), output),
        Check::Invariance { measure, target, tol, n, output } => (check_invariance(&measure, &target, &tol, n), output),
    }
}

#[allow(clippy::too_many_arguments)]
fn pressure(map: &str, potential: &str, alpha: &str, r: Option<&str>, c0: Option<&str>, visual: &str, n: i64, mode: Mode) -> Res<Outcome> {
    let f: RationalMap = map.parse()?;
    let phi: Potential = potential.parse()?;
    let alpha_q = q(alpha, "alpha")?;
    let (opts, r_source) = match mode {
        Mode::Certified => {
            let c0 = q(c0.ok_or_else(|| Failure::Usage("certified mode requires --c0".into()))?, "c0")?;
            let (r, src) = match r {
                Some(s) => (q(s, "R")?, "given"),
                None => (phi.holder_bound() * q(visual, "visual-constant")?, "holder_bound"),
            };
            (PressureOptions { alpha: alpha_q, ..PressureOptions::certified(n, c0, r) }, src)
        }
        Mode::Empirical => (PressureOptions { alpha: alpha_q, ..PressureOptions::empirical(n) }, "unused"),
    };
    let res = thermo::pressure(&f, &phi, &opts)?;
    let mut primary = res.to_json();
    primary["map"] = json!(f.to_string());
    primary["potential"] = serde_json::to_value(&phi).expect("serializable");
    primary["R_source"] = json!(r_source);
    primary["certified"] = json!(mode == Mode::Certified);
    let summary = format!(
        "P = {:.12} ± {:.3e}  (N = {}, anchor {}, {})",
        res.value.mid.to_f64(),
        res.value.rad.to_f64(),
        res.n_used,
        res.anchor,
        if mode == Mode::Certified { "certified" } else { "empirical, uncertified" }
    );
    Ok(Outcome {
        name: "pressure",
        params: json!({"map": map, "potential": potential, "alpha": alpha, "R": format_rational(&opts.r),
            "c0": format_rational(&opts.c0), "visual_constant": visual, "n": n, "mode": format!("{mode:?}").to_lowercase()}),
        primary,
        csv: None,
        summary,
        verdict: None,
    })
}

fn mme(target: &Target, potential: &str, depth: usize, anchor: Option<&str>) -> Res<Outcome> {
    let (json_m, csv, summary, extra) = match resolve(target)? {
        Dyn::Map(f) => {
            let phi: Potential = potential.parse()?;
            let x = match anchor {
                Some(a) => a.parse::<SpherePoint>()?,
                None => select_anchor(&f, depth, 20, 1000)?.1,
            };
            let mu = backward_orbit_measure(&f, &phi, &x, depth)?;
            let s = format!("{} atoms, displacement {:.3e}, anchor {}", mu.len(), mu.displacement().to_f64(), x);
            (mu.to_json(), mu.to_csv(), s, json!({"anchor": x}))
        }
        Dyn::Rule(g) => {
            let mu = mme_tile_measure(&g, depth);
            let s = format!("{} atoms of weight 1/{}", mu.len(), mu.len());
            (mu.to_json(), mu.to_csv(), s, json!({}))
        }
    };
    let mut params = target_json(target);
    params["potential"] = json!(potential);
    params["depth"] = json!(depth);
    params["anchor"] = extra.get("anchor").cloned().unwrap_or(Value::Null);
    Ok(Outcome { name: "mme", params, primary: json_m, csv: Some(csv), summary, verdict: None })
}

fn roots(poly: &str, bits: u32) -> Res<Outcome> {
    let p = parse_poly(poly)?;
    if p.degree() == 0 {
        return Err(Failure::Usage("--poly must have positive degree".into()));
    }
    let rs = certified_roots(&p, bits)?;
    let list: Vec<Value> = rs.iter().map(cluster_json).collect();
    Ok(Outcome {
        name: "roots",
        params: json!({"poly": poly, "bits": bits}),
        summary: format!("{} distinct roots of {}", rs.len(), p),
        primary: json!({"poly": p.to_string(), "roots": list}),
        csv: None,
        verdict: None,
    })
}

fn preimages(map: &str, point: &str, bits: u32) -> Res<Outcome> {
    let f: RationalMap = map.parse()?;
    let x: SpherePoint = point.parse()?;
    let pre = f.preimages(&x, bits)?;
    let list: Vec<Value> = pre.iter().map(cluster_json).collect();
    Ok(Outcome {
        name: "preimages",
        params: json!({"map": map, "point": point, "bits": bits}),
        summary: format!("{} preimages of {} under {}", pre.len(), x, f),
        primary: json!({"map": f.to_string(), "point": x, "preimages": list}),
        csv: None,
        verdict: None,
    })
}

fn transport(mu: &Path, nu: &Path, n: i64) -> Res<Outcome> {
    let a = read_measure(mu)?;
    let b = read_measure(nu)?;
    let r = wasserstein_any(&a, &b, n)?;
    let plan: Vec<Value> = r.plan.iter().map(|(i, j, m)| json!([i, j, format_rational(m)])).collect();
    Ok(Outcome {
        name: "wasserstein",
        params: json!({"mu": mu, "nu": nu, "n": n}),
        summary: format!("W = {:.12} ± {:.3e}", r.value.mid.to_f64(), r.value.rad.to_f64()),
        primary: json!({"value": ball_json(&r.value), "pinned_value": format_rational(&r.pinned_value),
            "certified": r.certified, "plan": plan}),
        csv: None,
        verdict: None,
    })
}

fn tiles(rule: &str, level: usize) -> Res<Outcome> {
    let g = SubdivisionMap::get(rule.parse::<RuleName>()?);
    let c = TileComplex::build(&g, level);
    Ok(Outcome {
        name: "tiles",
        params: json!({"rule": rule, "level": level}),
        summary: format!("{} tiles at level {}", c.len(), level),
        primary: c.to_json(),
        csv: None,
        verdict: None,
    })
}

fn birkhoff(map: &str, potential: &str, point: &str, steps: usize, n: i64) -> Res<Outcome> {
    let f: RationalMap = map.parse()?;
    let phi: Potential = potential.parse()?;
    let x: SpherePoint = point.parse()?;
    let s = birkhoff_sum(&f, &phi, &x, steps, n)?;
    Ok(Outcome {
        name: "birkhoff",
        params: json!({"map": map, "potential": potential, "point": point, "steps": steps, "n": n}),
        summary: format!("S_{steps} = {:.12} ± {:.3e}", s.mid.to_f64(), s.rad.to_f64()),
        primary: json!({"value": ball_json(&s)}),
        csv: None,
        verdict: None,
    })
}

fn check_jacobian(map: &str, j: &str, points: usize, tol: &str, n: i64) -> Res<Outcome> {
    let f: RationalMap = map.parse()?;
    let spec: JacobianSpec = j.parse()?;
    let tol_q = q(tol, "tol")?;
    let sys = SpherePatches::new(f, Vec::new())?;
    let mut rows = Vec::new();
    let mut ok = true;
    let mut k = 0u64;
    while rows.len() < points && k < 100 + 10 * points as u64 {
        k += 1;
        let x = ideal_enumerate(k);
        match jacobian_unitarity(&sys, &spec, &x, n) {
            Ok(r) => {
                ok &= r.hi().to_rational() <= tol_q;
                rows.push(json!({"point": x, "residual": ball_json(&r)}));
            }
            Err(Error::ExcludedPoint) => continue,
            Err(e) => return Err(e.into()),
        }
    }
    Ok(Outcome {
        name: "verify-jacobian",
        params: json!({"map": map, "J": j, "points": points, "tol": tol, "n": n}),
        summary: format!("{} regular points checked", rows.len()),
        primary: json!({"check": "jacobian", "inputs": {"map": map, "J": spec}, "residuals": rows,
            "verdict": if ok { "pass" } else { "fail" }, "tolerances": {"tol": tol}}),
        csv: None,
        verdict: Some(ok),
    })
}

fn widths(s: &str) -> Res<Vec<BigRational>> {
    s.split(',').map(|w| q(w.trim(), "widths")).collect()
}

fn check_membership(measure: &Path, target: &Target, j: &str, centers: usize, ws: &str, tol: &str, n: i64) -> Res<Outcome> {
    let spec: JacobianSpec = j.parse()?;
    let tol_q = q(tol, "tol")?;
    let ws = widths(ws)?;
    let report = match (read_measure(measure)?, resolve(target)?) {
        (AnyMeasure::Sphere(mu), Dyn::Map(f)) => {
            let sys = SpherePatches::half_planes(f)?;
            let cs: Vec<SpherePoint> = (1..=centers as u64).map(ideal_enumerate).collect();
            membership_residual(&mu, &sys, &spec, &hat_family(&cs, &ws), &atom_mesh(&mu), &tol_q, n)?
        }
        (AnyMeasure::Tri(mu), Dyn::Rule(g)) => {
            let cs: Vec<TilePoint> = g.vertices().into_iter().take(centers).collect();
            let sys = TilePatches::new(g);
            membership_residual(&mu, &sys, &spec, &hat_family(&cs, &ws), &atom_mesh(&mu), &tol_q, n)?
        }
        _ => return Err(Error::SpaceMismatch.into()),
    };
    let mut primary = report.to_json();
    primary["inputs"] = json!({"measure": measure, "target": target_json(target), "J": spec});
    let summary = match report.worst() {
        Some(w) => format!(
            "{} residuals; worst patch {} test {}: {:.6e} (slack {:.3e})",
            report.rows.len(),
            w.patch,
            w.test,
            w.value.mid.to_f64(),
            num_traits::ToPrimitive::to_f64(&w.slack).unwrap_or(f64::NAN)
        ),
        None => "no residuals".into(),
    };
    Ok(Outcome {
        name: "verify-membership",
        params: json!({"measure": measure, "target": target_json(target), "J": j, "centers": centers, "widths": ws.iter().map(format_rational).collect::<Vec<_>>(), "tol": tol, "n": n}),
        primary,
        csv: None,
        summary,
        verdict: Some(report.passes()),
    })
}

fn check_tangent(measure: &Path, phi: &str, witnesses: &Path, p_lower: &str, tol: &str, n: i64) -> Res<Outcome> {
    let nu = match read_measure(measure)? {
        AnyMeasure::Sphere(m) => m,
        AnyMeasure::Tri(_) => return Err(Error::SpaceMismatch.into()),
    };
    let phi_p: Potential = phi.parse()?;
    let tol_q = q(tol, "tol")?;
    let lower_q = q(p_lower, "p-lower")?;
    let lower = DirectedReal::from_terms(Direction::Lower, vec![Dyadic::from_rational(&lower_q, 64, Round::Floor)])?;
    let list = read_json(witnesses)?;
    let arr = list.as_array().ok_or_else(|| Failure::Lib(Error::Parse("witnesses: expected a list".into())))?;
    let mut ws = Vec::new();
    for w in arr {
        let pot: Potential = match w.get("potential") {
            Some(Value::String(s)) => s.parse()?,
            Some(v @ Value::Object(_)) => serde_json::from_value(v.clone()).map_err(|e| Error::Parse(format!("witness: {e}")))?,
            _ => return Err(Error::Parse("witness without potential".into()).into()),
        };
        let up = w.get("upper").and_then(|u| u.as_str()).ok_or_else(|| Error::Parse("witness without upper".into()))?;
        let up_q = q(up, "witnesses")?;
        ws.push((pot, DirectedReal::from_terms(Direction::Upper, vec![Dyadic::from_rational(&up_q, 64, Round::Ceil)])?));
    }
    let outcome = tangent_certificate(&nu, &phi_p, &ws, &lower, &tol_q, n)?;
    let (body, summary) = match &outcome {
        TangentOutcome::Pass { margin } => {
            (json!({"verdict": "pass", "margin": ball_json(margin)}), format!("PASS, smallest gap {:.6e}", margin.mid.to_f64()))
        }
        TangentOutcome::Fail { index, gap } => (
            json!({"verdict": "fail", "witness": index, "gap": ball_json(gap)}),
            format!("FAIL at witness {index}, gap {:.6e}", gap.mid.to_f64()),
        ),
    };
    let mut primary = json!({"check": "tangent", "inputs": {"measure": measure, "phi": phi_p, "p_lower": p_lower},
        "tolerances": {"tol": tol}});
    for (k, v) in body.as_object().expect("object") {
        primary[k] = v.clone();
    }
    Ok(Outcome {
        name: "verify-tangent",
        params: json!({"measure": measure, "phi": phi, "witnesses": witnesses, "p_lower": p_lower, "tol": tol, "n": n}),
        primary,
        csv: None,
        summary,
        verdict: Some(outcome.passes()),
    })
}

fn check_rokhlin(measure: &Path, target: &Target, j: &str, n: i64) -> Res<Outcome> {
    let spec: JacobianSpec = j.parse()?;
    let v = match (read_measure(measure)?, resolve(target)?) {
        (AnyMeasure::Sphere(mu), Dyn::Map(f)) => {
            let sys = SpherePatches::new(f, Vec::new())?;
            rokhlin_lower_bound(&mu, |x| sys.jacobian_at_point(&spec, x, n + 8), n)?
        }
        (AnyMeasure::Tri(mu), Dyn::Rule(g)) => {
            let sys = TilePatches::new(g);
            rokhlin_lower_bound(&mu, |x| sys.jacobian_at_point(&spec, x, n + 8), n)?
        }
        _ => return Err(Error::SpaceMismatch.into()),
    };
    Ok(Outcome {
        name: "verify-rokhlin",
        params: json!({"measure": measure, "target": target_json(target), "J": j, "n": n}),
        summary: format!("entropy >= {:.12} ± {:.3e}", v.mid.to_f64(), v.rad.to_f64()),
        primary: json!({"check": "rokhlin", "inputs": {"measure": measure, "J": spec}, "value": ball_json(&v)}),
        csv: None,
        verdict: None,
    })
}

fn check_invariance(measure: &Path, target: &Target, tol: &str, n: i64) -> Res<Outcome> {
    let tol_q = q(tol, "tol")?;
    let r = match (read_measure(measure)?, resolve(target)?) {
        (AnyMeasure::Sphere(mu), Dyn::Map(f)) => invariance_residual(&mu, |x| Some(f.apply(x)), n)?,
        (AnyMeasure::Tri(mu), Dyn::Rule(g)) => {
            let nu: FiniteMeasure<TilePoint> = pushforward(&mu, |x| Some(g.eval(x)))?;
            wasserstein(&mu, &nu, n)?
        }
        _ => return Err(Error::SpaceMismatch.into()),
    };
    let ok = r.value.lo().to_rational() <= tol_q;
    Ok(Outcome {
        name: "verify-invariance",
        params: json!({"measure": measure, "target": target_json(target), "tol": tol, "n": n}),
        summary: format!("W(mu, T_* mu) = {:.6e} ± {:.3e}", r.value.mid.to_f64(), r.value.rad.to_f64()),
        primary: json!({"check": "invariance", "inputs": {"measure": measure, "target": target_json(target)},
            "value": ball_json(&r.value), "exact_zero": r.pinned_value.is_zero(),
            "verdict": if ok { "pass" } else { "fail" }, "tolerances": {"tol": tol}}),
        csv: None,
        verdict: Some(ok),
    })
}
