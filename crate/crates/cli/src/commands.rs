use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt::Write as _;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use ribbonflow::dynamics::{orbit_rows, Coord, Dd, Flow, HPoint, SkewRotation, SkewState};
use ribbonflow::eigen::{character_eigen, family_eigen, EigenFamily, FamilyKind};
use ribbonflow::graphs::{ball, Group, GroupElem, Side, Vertex, VertexFun};
use ribbonflow::measures::{
    conjugate_boundary_point, decay_profile, plane_point, survivor_check, window, BoundaryPoint, MeasureEngine,
};
use ribbonflow::renorm::{
    complementary_endpoints, critical_times, direction_from_sequence, omega_test, shrinking_sequence,
    sign_sequence, Direction, OmegaReason, OmegaResult, RaySpec, ShrinkStatus,
};
use ribbonflow::surface::{ball_growth, render_svg, Surface};
use ribbonflow::{Error, QVec2, QuadNum};

use crate::args::{Cli, Command, DirectionArgs, FamilyArgs, FamilyName, Format, PairArgs, RenderTarget};
use crate::emit::{Emitted, Header, Status};

pub type CmdResult = std::result::Result<Emitted, Error>;

fn quad(s: &str) -> Result<QuadNum, Error> {
    Ok(s.parse::<QuadNum>()?)
}

fn quad_list(s: &str) -> Result<Vec<QuadNum>, Error> {
    s.split(',').map(|p| quad(p.trim())).collect()
}

fn vec2(s: &str) -> Result<QVec2, Error> {
    Ok(s.parse::<QVec2>()?)
}

fn parse_group(s: &str) -> Result<Group, Error> {
    let t = s.trim();
    let bad = || Error::Parse(format!("unknown group {t:?}; expected Z, Z^d, Z/m, F<k> or H"));
    Ok(match t {
        "Z" => Group::Zd(1),
        "H" | "Heisenberg" => Group::Heisenberg,
        _ => {
            if let Some(d) = t.strip_prefix("Z^") {
                Group::Zd(d.parse().map_err(|_| bad())?)
            } else if let Some(m) = t.strip_prefix("Z/") {
                Group::Cyclic(m.parse().map_err(|_| bad())?)
            } else if let Some(k) = t.strip_prefix('F') {
                Group::Free(k.parse().map_err(|_| bad())?)
            } else {
                return Err(bad());
            }
        }
    })
}

fn required(v: &Option<String>, flag: &str, family: FamilyName) -> Result<QuadNum, Error> {
    match v {
        Some(s) => quad(s),
        None => Err(Error::Parse(format!("--{flag} is required for family {family:?}"))),
    }
}

fn skew_parts(a: &FamilyArgs) -> Result<(Group, Vec<GroupElem>), Error> {
    let group = parse_group(&a.group)?;
    let gens = group.parse_tuple(&a.generators)?;
    Ok((group, gens))
}

fn build_family(
    a: &FamilyArgs,
    kind: FamilyName,
    t: &Option<String>,
    q: &Option<String>,
    chi: &str,
) -> Result<EigenFamily, Error> {
    let kind = match kind {
        FamilyName::Gz => FamilyKind::GzConstant,
        FamilyName::GzExp => FamilyKind::GzExponential { t: required(t, "t", kind)? },
        FamilyName::Tripod => FamilyKind::Tripod { t: required(t, "t", kind)? },
        FamilyName::Ntree => FamilyKind::NTreeConstant { n: a.n },
        FamilyName::NtreeHoro => FamilyKind::NTreeHorocyclic { n: a.n, q: required(q, "q", kind)? },
        FamilyName::Skew => {
            let (group, gens) = skew_parts(a)?;
            return character_eigen(&group, &gens, &quad_list(chi)?);
        }
    };
    family_eigen(&kind)
}

fn family(a: &FamilyArgs) -> Result<EigenFamily, Error> {
    build_family(a, a.family, &a.t, &a.q, &a.chi)
}

fn exact_direction(lambda: &QuadNum, ray: &str) -> Result<QVec2, Error> {
    let spec: RaySpec = ray.parse()?;
    match direction_from_sequence(lambda, &spec)? {
        Direction::Exact(v) => Ok(v),
        Direction::Interval(_) => Err(Error::InvalidParameter(format!(
            "the ray {ray:?} has no period, so it does not pin down a direction"
        ))),
    }
}

fn upward(v: QVec2) -> QVec2 {
    if v.y.is_negative() {
        v.neg()
    } else {
        v
    }
}

fn direction(d: &DirectionArgs, lambda: &QuadNum) -> Result<QVec2, Error> {
    match &d.theta {
        Some(s) => vec2(s),
        None => exact_direction(lambda, &d.ray),
    }
}

struct Pair {
    w1: EigenFamily,
    w2: EigenFamily,
    theta1: QVec2,
    theta2: QVec2,
}

fn pair(p: &PairArgs) -> Result<Pair, Error> {
    let w1 = family(&p.family)?;
    let kind2 = p.family2.unwrap_or(p.family.family);
    let w2 = build_family(
        &p.family,
        kind2,
        if p.t2.is_some() { &p.t2 } else { &p.family.t },
        if p.q2.is_some() { &p.q2 } else { &p.family.q },
        p.chi2.as_deref().unwrap_or(&p.family.chi),
    )?;
    if w1.graph.name() != w2.graph.name() {
        return Err(Error::InvalidParameter(format!(
            "w1 lives on {} but w2 on {}",
            w1.graph.name(),
            w2.graph.name()
        )));
    }
    let theta1 = exact_direction(&w1.lambda, &p.ray)?;
    let mut theta2 = exact_direction(&w2.lambda, &p.ray)?;
    if let Some(eps) = &p.perturb {
        theta2 = QVec2::new(theta2.x.clone(), theta2.y.try_add(&theta2.x.try_mul(&quad(eps)?)?)?);
    }
    Ok(Pair { w1, w2, theta1, theta2 })
}

fn pair_header(h: &mut Header, p: &Pair) {
    h.param("w1", describe(&p.w1));
    h.param("w2", describe(&p.w2));
    h.param("lambda1", &p.w1.lambda);
    h.param("lambda2", &p.w2.lambda);
    h.param("theta1", &p.theta1);
    h.param("theta2", &p.theta2);
}

fn describe(f: &EigenFamily) -> String {
    let mut s = f.id.clone();
    for (k, v) in &f.params {
        s.push_str(&format!(" {k}={v}"));
    }
    s
}

fn format_or(cli: &Cli, default: Format, allowed: &[Format]) -> Result<Format, Error> {
    let f = cli.format.unwrap_or(default);
    if allowed.contains(&f) {
        Ok(f)
    } else {
        Err(Error::Parse(format!("format {f:?} is not available for this subcommand")))
    }
}

pub fn run(cli: &Cli) -> CmdResult {
    let mut h = Header::new(cli.seed);
    match &cli.command {
        Command::Shrink { lambda, theta, depth } => {
            let fmt = format_or(cli, Format::Csv, &[Format::Csv, Format::Json])?;
            shrink(&mut h, fmt, &quad(lambda)?, &vec2(theta)?, *depth)
        }
        Command::Omega { n, alpha, depth } => {
            let fmt = format_or(cli, Format::Csv, &[Format::Csv, Format::Json])?;
            omega(&mut h, fmt, *n, &quad(alpha)?, *depth)
        }
        Command::Eigen { family: f, window, depth } => {
            let fmt = format_or(cli, Format::Csv, &[Format::Csv, Format::Json])?;
            eigen(&mut h, fmt, &family(f)?, *window, *depth)
        }
        Command::Simulate { family: f, direction: d, alpha, steps, float, histogram } => {
            let fmt = format_or(cli, Format::Csv, &[Format::Csv, Format::Json])?;
            let mut rng = ChaCha8Rng::seed_from_u64(cli.seed);
            let u = QuadNum::frac(rng.gen_range(0..1_000_000), 1_000_000);
            match alpha {
                Some(alpha) => {
                    let (group, gens) = skew_parts(f)?;
                    h.param("group", &f.group);
                    h.param("generators", &f.generators);
                    h.param("alpha", alpha);
                    h.param("start", format!("({u}, e)"));
                    let alpha = quad(alpha)?;
                    if *float {
                        skew::<Dd>(&mut h, fmt, group, gens, &alpha, &u, *steps, *histogram)
                    } else {
                        skew::<QuadNum>(&mut h, fmt, group, gens, &alpha, &u, *steps, *histogram)
                    }
                }
                None => {
                    let fam = family(f)?;
                    let s = Surface::from_family(&fam);
                    let theta = upward(direction(d, &fam.lambda)?);
                    h.param("family", describe(&fam));
                    h.param("lambda", &fam.lambda);
                    h.param("theta", &theta);
                    h.param("budget", cli.budget);
                    let root = s.g().root();
                    let t = s.circle_length(&root)?.try_mul(&u)?;
                    h.param("start", format!("({root}, {t})"));
                    let start = HPoint { a: root, t };
                    if *float {
                        simulate::<Dd>(&mut h, fmt, &s, &theta, cli.budget, &start, *steps, *histogram)
                    } else {
                        simulate::<QuadNum>(&mut h, fmt, &s, &theta, cli.budget, &start, *steps, *histogram)
                    }
                }
            }
        }
        Command::Survivor { pair: p, depth, window } => {
            let fmt = format_or(cli, Format::Json, &[Format::Csv, Format::Json])?;
            survivor(&mut h, fmt, &pair(p)?, *depth, *window)
        }
        Command::Decay { pair: p, depth, window } => {
            let fmt = format_or(cli, Format::Csv, &[Format::Csv, Format::Json])?;
            decay(&mut h, fmt, &pair(p)?, *depth, *window)
        }
        Command::Growth { family: f, depth } => {
            let fmt = format_or(cli, Format::Csv, &[Format::Csv, Format::Json])?;
            growth(&mut h, fmt, &family(f)?, *depth)
        }
        Command::Conjugate { pair: p, depth, window } => {
            let fmt = format_or(cli, Format::Csv, &[Format::Csv, Format::Json])?;
            conjugate(&mut h, fmt, &pair(p)?, *depth, *window, cli.budget)
        }
        Command::Render { family: f, target, lambda, window, depth } => match target {
            RenderTarget::Surface => {
                format_or(cli, Format::Svg, &[Format::Svg])?;
                let fam = family(f)?;
                Ok(Emitted::ok(render_svg(&Surface::from_family(&fam), *window)?))
            }
            RenderTarget::LimitSet => {
                let fmt = format_or(cli, Format::Svg, &[Format::Svg, Format::Csv])?;
                let lambda = match lambda {
                    Some(l) => quad(l)?,
                    None => family(f)?.lambda,
                };
                limit_set(&mut h, fmt, &lambda, *depth)
            }
        },
    }
}

fn shrink(h: &mut Header, fmt: Format, lambda: &QuadNum, theta: &QVec2, depth: usize) -> CmdResult {
    let data = shrinking_sequence(lambda, theta, depth)?;
    let signs = sign_sequence(&data)?;
    let critical = critical_times(&data)?;
    let status = match data.status {
        ShrinkStatus::Continues => Status::Ok,
        ShrinkStatus::NoStrictShrinker => {
            Status::NotRenormalizable(format!("no generator strictly shrinks stage {}", data.len()))
        }
        ShrinkStatus::ExcludedTail(c) => {
            Status::NotRenormalizable(format!("the sequence ends in a tail excluded by condition ({c})"))
        }
    };
    h.param("lambda", lambda);
    h.param("theta", theta);
    h.param("s_0", signs[0]);
    h.param("norm_sq_0", &data.norms[0]);
    h.param("status", format!("{:?}", data.status));
    if let Some(p) = data.period {
        h.param("period", format!("start {} length {}", p.start, p.len));
    }
    let body = match fmt {
        Format::Json => h.json(json!({
            "data": data,
            "signs": signs,
            "critical": critical,
        })),
        _ => {
            let rows = (1..=data.len())
                .map(|n| {
                    vec![
                        n.to_string(),
                        data.ray[n - 1].to_string(),
                        signs[n].to_string(),
                        data.norms[n].to_string(),
                        critical.contains(&n).to_string(),
                    ]
                })
                .collect();
            h.csv(&["n", "increment", "sign", "norm_sq", "critical"], rows)
        }
    };
    Ok(Emitted { body, status })
}

fn omega(h: &mut Header, fmt: Format, n: u32, alpha: &QuadNum, depth: usize) -> CmdResult {
    let res = omega_test(n, alpha, depth)?;
    h.param("n", n);
    h.param("alpha", alpha);
    let (class, detail) = match &res {
        OmegaResult::InOmega(d) => (
            "InOmega",
            match d.period {
                Some(p) => format!(
                    "prefix [{}] period [{}]",
                    ray_text(&d.ray[..p.start]),
                    ray_text(&d.ray[p.start..p.start + p.len])
                ),
                None => format!("ray {}", ray_text(&d.ray)),
            },
        ),
        OmegaResult::Undetermined(d) => ("Undetermined", format!("no period within {}; ray {}", d.len(), ray_text(&d.ray))),
        OmegaResult::NotInOmega(OmegaReason::NoStrictShrinker { step }) => {
            ("NotInOmega", format!("no strict shrinker at step {step}"))
        }
        OmegaResult::NotInOmega(OmegaReason::AxisHit { step }) => ("NotInOmega", format!("axis reached at step {step}")),
        OmegaResult::NotInOmega(OmegaReason::ComplementaryEndpoint { period }) => {
            ("NotInOmega", format!("complementary-interval endpoint, period {}", ray_text(period)))
        }
    };
    let body = match fmt {
        Format::Json => h.json(json!({ "classification": class, "detail": detail, "result": res })),
        _ => h.csv(
            &["n", "alpha", "classification", "detail"],
            vec![vec![n.to_string(), alpha.to_string(), class.into(), detail]],
        ),
    };
    Ok(Emitted::ok(body))
}

fn ray_text(ray: &[ribbonflow::Letter]) -> String {
    ray.iter().map(|l| l.to_string()).collect::<Vec<_>>().join(" ")
}

fn side_name(s: Side) -> &'static str {
    match s {
        Side::A => "A",
        Side::B => "B",
    }
}

fn eigen(h: &mut Header, fmt: Format, fam: &EigenFamily, radius: u32, depth: u32) -> CmdResult {
    let rep = fam.verify(depth)?;
    h.param("family", describe(fam));
    h.param("graph", fam.graph.name());
    h.param("lambda", &fam.lambda);
    h.param("residual_radius", depth);
    h.param("residual", &rep.max_residual);
    let g = fam.graph.as_ref();
    let mut rows = Vec::new();
    for (v, d) in ball(g, &g.root(), radius) {
        rows.push(vec![v.to_string(), side_name(g.side(&v)).into(), d.to_string(), fam.eval(&v)?.to_string()]);
    }
    let status = if rep.is_exact() && rep.nonpositive.is_none() {
        Status::Ok
    } else {
        Status::CheckFailed(format!("residual {} on the radius-{depth} ball", rep.max_residual))
    };
    let body = match fmt {
        Format::Json => h.json(json!({
            "family": fam.id,
            "params": fam.params,
            "lambda": fam.lambda,
            "residual": rep.max_residual,
            "checked": rep.checked,
            "nonpositive": rep.nonpositive.as_ref().map(|v| v.to_string()),
            "values": rows.iter().map(|r| json!({"vertex": r[0], "side": r[1], "distance": r[2], "value": r[3]})).collect::<Vec<Value>>(),
        })),
        _ => h.csv(&["vertex", "side", "distance", "value"], rows),
    };
    Ok(Emitted { body, status })
}

#[allow(clippy::too_many_arguments)]
fn simulate<C: Coord>(
    h: &mut Header,
    fmt: Format,
    s: &Surface,
    theta: &QVec2,
    budget: usize,
    start: &HPoint<QuadNum>,
    steps: usize,
    histogram: bool,
) -> CmdResult {
    let mut flow = Flow::<C>::new(s, theta, budget)?;
    let p = HPoint { a: start.a.clone(), t: C::from_quad(&start.t)? };
    let orbit = flow.orbit(&p, steps)?;
    h.param("mode", if std::any::type_name::<C>().ends_with("Dd") { "float" } else { "exact" });
    if histogram {
        let mut counts: BTreeMap<(Vertex, i64), u64> = BTreeMap::new();
        for q in &orbit {
            *counts.entry((q.a.clone(), q.t.floor()?)).or_default() += 1;
        }
        let rows: Vec<Vec<String>> = counts
            .into_iter()
            .map(|((a, k), c)| vec![a.to_string(), k.to_string(), (k + 1).to_string(), c.to_string()])
            .collect();
        return Ok(Emitted::ok(emit_table(h, fmt, &["vertex", "lo", "hi", "visits"], rows)));
    }
    let rows = orbit_rows(&mut flow, &orbit)?
        .into_iter()
        .map(|r| vec![r.step.to_string(), r.vertex, r.edge, r.coordinate])
        .collect();
    Ok(Emitted::ok(emit_table(h, fmt, &["step", "vertex", "edge", "coordinate"], rows)))
}

#[allow(clippy::too_many_arguments)]
fn skew<C: Coord>(
    h: &mut Header,
    fmt: Format,
    group: Group,
    gens: Vec<GroupElem>,
    alpha: &QuadNum,
    x0: &QuadNum,
    steps: usize,
    histogram: bool,
) -> CmdResult {
    let identity = group.identity();
    let rot = SkewRotation::<C>::new(group, gens, alpha)?;
    let orbit = rot.orbit(&SkewState { x: C::from_quad(x0)?, g: identity }, steps)?;
    if histogram {
        let mut counts: BTreeMap<GroupElem, u64> = BTreeMap::new();
        for st in &orbit {
            *counts.entry(st.g.clone()).or_default() += 1;
        }
        let rows = counts.into_iter().map(|(g, c)| vec![g.to_string(), c.to_string()]).collect();
        return Ok(Emitted::ok(emit_table(h, fmt, &["g", "visits"], rows)));
    }
    let rows = orbit
        .iter()
        .enumerate()
        .map(|(i, st)| vec![i.to_string(), st.x.to_string(), st.g.to_string()])
        .collect();
    Ok(Emitted::ok(emit_table(h, fmt, &["step", "x", "g"], rows)))
}

fn emit_table(h: &Header, fmt: Format, cols: &[&str], rows: Vec<Vec<String>>) -> String {
    match fmt {
        Format::Json => h.json(Value::Array(
            rows.into_iter()
                .map(|r| Value::Object(cols.iter().map(|c| c.to_string()).zip(r.into_iter().map(Value::String)).collect()))
                .collect(),
        )),
        _ => h.csv(cols, rows),
    }
}

fn survivor(h: &mut Header, fmt: Format, p: &Pair, depth: usize, radius: u32) -> CmdResult {
    pair_header(h, p);
    h.param("depth", depth);
    h.param("window", radius);
    let data = shrinking_sequence(&p.w1.lambda, &p.theta1, depth)?;
    let g = p.w2.graph.as_ref();
    let f = plane_point(p.w2.graph.clone(), p.w2.oracle.clone(), &p.theta2);
    let rep = survivor_check(g, &f, &data, depth, &g.root(), radius)?;
    let status = match &rep.witness {
        None => Status::Ok,
        Some(w) => Status::CheckFailed(format!(
            "Upsilon^(g_{}) f({}) = {} is outside {}",
            w.n, w.vertex, w.value, w.sign
        )),
    };
    let body = match fmt {
        Format::Csv => {
            let (n, v, val, s) = match &rep.witness {
                Some(w) => (w.n.to_string(), w.vertex.to_string(), w.value.to_string(), w.sign.to_string()),
                None => Default::default(),
            };
            h.csv(
                &["depth", "checked", "passed", "witness_n", "witness_vertex", "witness_value", "witness_sign"],
                vec![vec![rep.depth.to_string(), rep.checked.to_string(), rep.passed().to_string(), n, v, val, s]],
            )
        }
        _ => h.json(json!({
            "verified_depth": if rep.passed() { Some(depth) } else { None },
            "passed": rep.passed(),
            "report": rep,
            "increments": ray_text(&data.ray),
        })),
    };
    Ok(Emitted { body, status })
}

fn decay(h: &mut Header, fmt: Format, p: &Pair, depth: usize, radius: u32) -> CmdResult {
    pair_header(h, p);
    h.param("depth", depth);
    let data = shrinking_sequence(&p.w1.lambda, &p.theta1, depth)?;
    let g = p.w2.graph.as_ref();
    let f = plane_point(p.w2.graph.clone(), p.w2.oracle.clone(), &p.theta2);
    let mut profiles = Vec::new();
    for v in window(g, &g.root(), radius) {
        profiles.push(decay_profile(g, &f, &v, &data, depth)?);
    }
    let body = match fmt {
        Format::Json => h.json(json!(profiles)),
        _ => {
            let mut rows = Vec::new();
            for prof in &profiles {
                for (n, x) in prof.values.iter().enumerate() {
                    rows.push(vec![
                        prof.vertex.to_string(),
                        n.to_string(),
                        x.to_string(),
                        prof.critical.contains(&n).to_string(),
                    ]);
                }
            }
            h.csv(&["vertex", "n", "value", "critical"], rows)
        }
    };
    Ok(Emitted::ok(body))
}

fn growth(h: &mut Header, fmt: Format, fam: &EigenFamily, depth: usize) -> CmdResult {
    let s = Surface::from_family(fam);
    let gr = ball_growth(&s, &s.g().root(), depth + 1)?;
    let slack = gr.slack(&s.lambda)?;
    let predicted = gr.predicted_slack(&s.lambda)?;
    h.param("family", describe(fam));
    h.param("lambda", &fam.lambda);
    let rows: Vec<Vec<String>> = (0..=depth)
        .map(|n| {
            let at = |xs: &Vec<QuadNum>| if n == 0 { String::new() } else { xs[n - 1].to_string() };
            vec![
                n.to_string(),
                gr.layer_sizes[n].to_string(),
                gr.ell[n].to_string(),
                gr.widest[n].to_string(),
                at(&slack),
                at(&predicted),
            ]
        })
        .collect();
    let status = if slack.iter().any(QuadNum::is_negative) {
        Status::CheckFailed("l_{n+1} exceeds lambda l_n - l_{n-1}".into())
    } else {
        Status::Ok
    };
    let body = emit_table(h, fmt, &["n", "layer_size", "ell", "widest", "slack", "predicted_slack"], rows);
    Ok(Emitted { body, status })
}

fn conjugate(h: &mut Header, fmt: Format, p: &Pair, depth: usize, radius: u32, budget: usize) -> CmdResult {
    pair_header(h, p);
    h.param("depth", depth);
    let s = Surface::from_family(&p.w1);
    let theta1 = upward(p.theta1.clone());
    let f: Arc<dyn VertexFun> = Arc::new(plane_point(p.w2.graph.clone(), p.w2.oracle.clone(), &p.theta2));
    let mut flow = Flow::<QuadNum>::new(&s, &theta1, budget)?;
    let mut eng = MeasureEngine::new(&mut flow, f, depth);
    let g = s.graph.clone();
    let mut rows = Vec::new();
    for a in window(g.as_ref(), &g.root(), radius) {
        if g.side(&a) != Side::A {
            continue;
        }
        for e in g.edges_at(&a) {
            let at = |x: QuadNum| BoundaryPoint::Bottom { edge: e.clone(), x };
            let lo = conjugate_boundary_point(&mut eng, &p.theta2, &at(QuadNum::zero()))?;
            let hi = conjugate_boundary_point(&mut eng, &p.theta2, &at(s.width(&e)?))?;
            let (BoundaryPoint::Bottom { x: x0, .. }, BoundaryPoint::Bottom { x: x1, .. }) = (&lo.point, &hi.point)
            else {
                unreachable!("bottom points map to bottom points")
            };
            rows.push(vec![
                e.to_string(),
                s.width(&e)?.to_string(),
                x1.try_sub(x0)?.to_string(),
                lo.error.try_add(&hi.error)?.to_string(),
                p.w2.eval(&g.beta(&e))?.to_string(),
            ]);
        }
    }
    let body = emit_table(h, fmt, &["edge", "width1", "image_length", "error", "width2"], rows);
    Ok(Emitted::ok(body))
}

fn limit_set(h: &mut Header, fmt: Format, lambda: &QuadNum, depth: usize) -> CmdResult {
    let pts = complementary_endpoints(lambda, depth)?;
    h.param("lambda", lambda);
    h.param("depth", depth);
    if fmt == Format::Csv {
        let rows = pts.iter().map(|v| vec![v.x.to_string(), v.y.to_string()]).collect();
        return Ok(Emitted::ok(h.csv(&["x", "y"], rows)));
    }
    // projective line drawn as a circle: the direction at angle phi sits at 2 phi
    let (r, c) = (200.0, 220.0);
    let mut body = String::new();
    writeln!(body, r#"<circle cx="{c}" cy="{c}" r="{r}" fill="none" stroke="lightgray"/>"#).unwrap();
    for v in &pts {
        let (x, y) = v.to_f64();
        let phi = 2.0 * y.atan2(x);
        let (px, py) = (c + r * phi.cos(), c - r * phi.sin());
        writeln!(body, r#"<circle cx="{px:.2}" cy="{py:.2}" r="2" fill="black"><title>({}, {})</title></circle>"#, v.x, v.y)
            .unwrap();
    }
    let axis = |phi: f64| (c + r * phi.cos(), c - r * phi.sin());
    for phi in [0.0, PI / 2.0, PI, 1.5 * PI] {
        let (x, y) = axis(phi);
        writeln!(body, r#"<line x1="{c}" y1="{c}" x2="{x:.2}" y2="{y:.2}" stroke="lightgray"/>"#).unwrap();
    }
    Ok(Emitted::ok(format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0}\" height=\"{0}\">\n<!-- {1} -->\n{body}</svg>\n",
        2.0 * c,
        h.comment_line()
    )))
}
