use std::fs;
use std::path::{Path, PathBuf};

use pmod_core::grid::DEFAULT_ENTRY_BUDGET;
use pmod_core::io::{self, IoError};
use pmod_core::thin::{self, ThinError};
use pmod_core::{
    chamber_poset, condense as condense_module, detect_isotopy_subdivision, end_dim, fixtures, generate, hom_space, random_thin_module,
    svg, verify_condensation, ChamberError, FieldSpec, GridShape, PersistenceModule, Region, Subdivision, ZigzagError,
};
use rand::Rng;
use serde_json::{json, Value};

use crate::{Kind, What};

pub struct Outcome {
    code: u8,
    body: Value,
}

impl Outcome {
    fn ok(body: Value) -> Self {
        Outcome { code: 0, body: with_status(body, "ok") }
    }

    fn fail(body: Value) -> Self {
        Outcome { code: 1, body: with_status(body, "fail") }
    }

    fn malformed(message: impl ToString) -> Self {
        Outcome { code: 2, body: json!({"status": "error", "kind": "Malformed", "message": message.to_string()}) }
    }

    pub fn into_parts(self) -> (u8, Value) {
        (self.code, self.body)
    }
}

fn with_status(mut body: Value, status: &str) -> Value {
    if let Value::Object(map) = &mut body {
        map.insert("status".into(), status.into());
    }
    body
}

type Run = Result<Outcome, Outcome>;

fn finish(r: Run) -> Outcome {
    r.unwrap_or_else(|e| e)
}

fn read_json(path: &Path) -> Result<Value, Outcome> {
    let text = fs::read_to_string(path).map_err(|e| Outcome::malformed(format!("{}: {e}", path.display())))?;
    io::parse(&text).map_err(|e| Outcome::malformed(format!("{}: {e}", path.display())))
}

fn write_file(path: &Path, contents: &str) -> Result<(), Outcome> {
    fs::write(path, contents).map_err(|e| Outcome::malformed(format!("{}: {e}", path.display())))
}

fn budget() -> Result<u64, Outcome> {
    match std::env::var("PMOD_BUDGET") {
        Ok(v) => v.trim().parse().map_err(|_| Outcome::malformed(format!("PMOD_BUDGET={v} is not a nonnegative integer"))),
        Err(_) => Ok(DEFAULT_ENTRY_BUDGET),
    }
}

fn load_unchecked(path: &Path) -> Result<PersistenceModule, Outcome> {
    let v = read_json(path)?;
    io::module_from_json_with_budget(&v, budget()?).map_err(|e: IoError| Outcome::malformed(e))
}

/// Loads a module and rejects it as malformed unless every square commutes.
fn load(path: &Path) -> Result<PersistenceModule, Outcome> {
    let m = load_unchecked(path)?;
    let report = m.validate();
    if !report.is_ok() {
        let mut body = json!({"status": "error", "kind": "InvalidModule"});
        body["validation"] = io::validation_to_json(&report);
        return Err(Outcome { code: 2, body });
    }
    Ok(m)
}

fn chamber_failure(e: ChamberError) -> Outcome {
    use ChamberError::*;
    let kind = match &e {
        UnsupportedDimension(_) | Malformed(_) | Grid(_) | Zigzag(ZigzagError::Grid(_)) => return Outcome::malformed(e),
        NonConvexChamber { .. } => "NonConvexChamber",
        DisconnectedChamber { .. } => "DisconnectedChamber",
        NonIsoWithinChamber { .. } => "NonIsoWithinChamber",
        AntisymmetryViolation { .. } => "AntisymmetryViolation",
        NoComparableWitness { .. } => "NoComparableWitness",
        WellDefinednessFailure(_) => "WellDefinednessFailure",
        FunctorialityFailure { .. } => "FunctorialityFailure",
        NaturalityFailure { .. } => "NaturalityFailure",
        Zigzag(_) => "ZigzagFailure",
    };
    let detail = match &e {
        NonConvexChamber { chamber, witness } => json!({
            "chamber": chamber,
            "lower": io::cell_to_json(&witness.lower),
            "middle": io::cell_to_json(&witness.middle),
            "upper": io::cell_to_json(&witness.upper),
        }),
        DisconnectedChamber { chamber } => json!({"chamber": chamber}),
        NonIsoWithinChamber { chamber, a, b } => json!({"chamber": chamber, "from_cell": io::cell_to_json(a), "to_cell": io::cell_to_json(b)}),
        AntisymmetryViolation { p, q, witnesses } => json!({
            "p": p,
            "q": q,
            "witnesses": witnesses.iter().map(|(a, b)| json!([io::cell_to_json(a), io::cell_to_json(b)])).collect::<Vec<_>>(),
        }),
        NoComparableWitness { from, to } => json!({"from": from, "to": to}),
        WellDefinednessFailure(w) => json!({
            "from": w.from,
            "to": w.to,
            "first": [io::cell_to_json(&w.first.0), io::cell_to_json(&w.first.1)],
            "second": [io::cell_to_json(&w.second.0), io::cell_to_json(&w.second.1)],
            "first_matrix": io::matrix_to_json(&w.first_matrix),
            "second_matrix": io::matrix_to_json(&w.second_matrix),
        }),
        FunctorialityFailure { p, q, first, second } => {
            json!({"p": p, "q": q, "first": io::matrix_to_json(first), "second": io::matrix_to_json(second)})
        }
        NaturalityFailure { cell, axis } => json!({"cell": io::cell_to_json(cell), "axis": axis}),
        _ => json!({}),
    };
    Outcome::fail(json!({"kind": kind, "message": e.to_string(), "detail": detail}))
}

fn thin_failure(e: ThinError) -> Outcome {
    let kind = match &e {
        ThinError::ZeroParameter | ThinError::Grid(_) => return Outcome::malformed(e),
        ThinError::NotThin(_) => "NotThin",
        ThinError::CrossComponentNonzero(..) => "CrossComponentNonzero",
        ThinError::NotIntervalSupport(_) => "NotIntervalSupport",
        ThinError::NontrivialHolonomy(_) => "NontrivialHolonomy",
        ThinError::NaturalityFailure { .. } => "NaturalityFailure",
    };
    let mut body = json!({"kind": kind, "message": e.to_string()});
    match &e {
        ThinError::NontrivialHolonomy(h) => body["holonomy"] = io::holonomy_to_json(h),
        ThinError::NotThin(c) => body["cell"] = io::cell_to_json(c),
        ThinError::NaturalityFailure { cell, axis } => body["detail"] = json!({"cell": io::cell_to_json(cell), "axis": axis}),
        _ => {}
    }
    Outcome::fail(body)
}

pub fn validate(file: &Path) -> Outcome {
    finish((|| {
        let m = load_unchecked(file)?;
        let report = m.validate();
        let body = json!({"validation": io::validation_to_json(&report)});
        Ok(if report.is_ok() { Outcome::ok(body) } else { Outcome::fail(body) })
    })())
}

fn subdivision_and_poset(m: &PersistenceModule) -> Result<(Subdivision, pmod_core::FinitePoset), Outcome> {
    let s = detect_isotopy_subdivision(m).map_err(chamber_failure)?;
    let p = chamber_poset(&s).map_err(chamber_failure)?;
    Ok((s, p))
}

pub fn chambers(file: &Path, svg_out: Option<&Path>) -> Outcome {
    finish((|| {
        let m = load(file)?;
        let (s, p) = subdivision_and_poset(&m)?;
        if let Some(out) = svg_out {
            let text = svg::render_subdivision(&s, &p).map_err(Outcome::malformed)?;
            write_file(out, &text)?;
        }
        Ok(Outcome::ok(json!({
            "chambers": s.len(),
            "subdivision": io::subdivision_to_json(&s),
            "hasse": p.hasse().iter().map(|&(a, b)| json!([a, b])).collect::<Vec<_>>(),
        })))
    })())
}

pub fn condense(file: &Path, out: &Path, subdivision: Option<&Path>) -> Outcome {
    finish((|| {
        let m = load(file)?;
        let s = match subdivision {
            Some(path) => {
                let s = io::subdivision_from_json(&read_json(path)?).map_err(Outcome::malformed)?;
                if s.shape() != m.shape() {
                    return Err(Outcome::malformed("subdivision and module live on different grids"));
                }
                s
            }
            None => detect_isotopy_subdivision(&m).map_err(chamber_failure)?,
        };
        let p = chamber_poset(&s).map_err(chamber_failure)?;
        let c = condense_module(&m, &s, &p).map_err(chamber_failure)?;
        s.check(&m).map_err(chamber_failure)?;
        let alpha = verify_condensation(&m, &c.module, &c.quantization).map_err(chamber_failure)?;
        let artifact = json!({
            "subdivision": io::subdivision_to_json(&s),
            "poset_module": io::poset_module_to_json(&c.module),
            "certificate": {"natural": true, "invertible": true, "alpha": io::module_map_to_json(&alpha)},
        });
        write_file(out, &io::to_canonical_string(&artifact))?;
        Ok(Outcome::ok(json!({"chambers": s.len(), "dims": c.module.dims()})))
    })())
}

pub fn thin_decompose(file: &Path, report_out: Option<&Path>, trials: usize, seed: u64) -> Outcome {
    finish((|| {
        let m = load(file)?;
        let report = thin::decompose(&m, trials, seed).map_err(thin_failure)?;
        let body = io::report_to_json(&report);
        if let Some(out) = report_out {
            write_file(out, &io::to_canonical_string(&body))?;
        }
        Ok(if report.all_intervals() { Outcome::ok(body) } else { Outcome::fail(body) })
    })())
}

pub fn interval_iso(file: &Path) -> Outcome {
    finish((|| {
        let m = load(file)?;
        let iso = thin::iso_to_interval(&m).map_err(thin_failure)?;
        let support: Vec<Value> = m.support().cells().iter().map(io::cell_to_json).collect();
        Ok(Outcome::ok(json!({"support": support, "alpha": io::module_map_to_json(&iso.alpha), "natural": true})))
    })())
}

pub fn hom(a: &Path, b: &Path) -> Outcome {
    finish((|| {
        let (m, n) = (load(a)?, load(b)?);
        let h = hom_space(&m, &n).map_err(Outcome::malformed)?;
        Ok(Outcome::ok(io::hom_to_json(&h)))
    })())
}

pub fn end(file: &Path) -> Outcome {
    finish((|| {
        let m = load(file)?;
        Ok(Outcome::ok(json!({"dim": end_dim(&m)})))
    })())
}

pub struct GenArgs {
    pub kind: Kind,
    pub m: Option<String>,
    pub seed: u64,
    pub shape: Option<String>,
    pub field: String,
    pub density: f64,
    pub chambers: usize,
    pub max_dim: usize,
    pub twist: bool,
    pub out: PathBuf,
    pub subdivision_out: Option<PathBuf>,
}

fn parse_shape(s: Option<&str>, default: &[usize]) -> Result<GridShape, Outcome> {
    let sizes: Vec<usize> = match s {
        None => default.to_vec(),
        Some(s) => s
            .split(['x', 'X'])
            .map(|t| t.trim().parse::<usize>())
            .collect::<Result<_, _>>()
            .map_err(|_| Outcome::malformed(format!("bad shape {s:?}, expected e.g. 8x8")))?,
    };
    GridShape::new(&sizes).map_err(Outcome::malformed)
}

fn pick(rng: &mut impl Rng, n: usize) -> Vec<usize> {
    (0..2).map(|_| rng.gen_range(0..n)).collect()
}

/// `↑L ∩ ↓U` for random two-element `L`, `U`, redrawn until it is an interval.
fn random_interval(shape: &GridShape, seed: u64) -> Region {
    let mut rng = pmod_core::sample::rng(seed);
    for _ in 0..200 {
        let (lo, hi) = (pick(&mut rng, shape.len()), pick(&mut rng, shape.len()));
        let up = Region::from_indices(shape, lo).up_closure();
        let down = Region::from_indices(shape, hi).down_closure();
        let r = Region::from_indices(shape, (0..shape.len()).filter(|&i| up[i] && down[i]));
        if !r.is_empty() && r.is_interval() {
            return r;
        }
    }
    Region::full(shape)
}

pub fn gen(a: GenArgs) -> Outcome {
    finish((|| {
        let field = FieldSpec::parse(&a.field).map_err(Outcome::malformed)?;
        let mut subdivision = None;
        let module = match a.kind {
            Kind::Interval => {
                let shape = parse_shape(a.shape.as_deref(), &[8, 8])?;
                let support = random_interval(&shape, a.seed);
                PersistenceModule::interval_module(field, shape, &support).map_err(Outcome::malformed)?
            }
            Kind::RandomThin => {
                let shape = parse_shape(a.shape.as_deref(), &[8, 8])?;
                random_thin_module(field, shape, a.density, a.seed).map_err(Outcome::malformed)?
            }
            Kind::Inflate => {
                let shape = parse_shape(a.shape.as_deref(), &[8, 8])?;
                let sample =
                    generate::inflated_module(field, &shape, a.chambers, a.max_dim, a.twist, a.seed).map_err(Outcome::malformed)?;
                subdivision = Some(sample.subdivision);
                sample.module
            }
            Kind::ExDim3 => {
                let text = a.m.as_deref().unwrap_or("1");
                let m = match text.trim().parse::<i64>() {
                    Ok(v) => field.from_i64(v),
                    Err(_) => field.parse_scalar(text).map_err(Outcome::malformed)?,
                };
                thin::ex_dim3(field, &m).map_err(Outcome::malformed)?
            }
            Kind::FixtureAxesCross => {
                let shape = parse_shape(a.shape.as_deref(), &[4, 4])?;
                let arm = shape.sizes()[0].max(2) - 1;
                let (m, labels) = fixtures::axes_cross(field, arm);
                subdivision = Some(Subdivision::from_assignment(m.shape().clone(), labels).map_err(Outcome::malformed)?);
                m
            }
            Kind::FixturePunctured => {
                let shape = parse_shape(a.shape.as_deref(), &[5, 5])?;
                fixtures::punctured_plane(field, (shape.sizes()[0].max(3) - 1) / 2)
            }
        };
        write_file(&a.out, &io::to_canonical_string(&io::module_to_json(&module)))?;
        if let Some(path) = &a.subdivision_out {
            let s = subdivision.ok_or_else(|| Outcome::malformed("this kind has no generating subdivision"))?;
            write_file(path, &io::to_canonical_string(&io::subdivision_to_json(&s)))?;
        }
        Ok(Outcome::ok(json!({"shape": module.shape().sizes(), "dims": module.dims()})))
    })())
}

pub fn render(file: &Path, what: What, out: &Path) -> Outcome {
    finish((|| {
        let m = load(file)?;
        let text = match what {
            What::Chambers => {
                let (s, p) = subdivision_and_poset(&m)?;
                svg::render_subdivision(&s, &p)
            }
            What::Support => {
                let report = thin::decompose(&m, 200, 0).map_err(thin_failure)?;
                svg::render_components(m.shape(), &report)
            }
        }
        .map_err(Outcome::malformed)?;
        write_file(out, &text)?;
        Ok(Outcome::ok(json!({"svg": out.display().to_string()})))
    })())
}
