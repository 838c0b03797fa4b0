//! Acceptance run: one PASS/FAIL line per criterion, with wall time.
//! Exits nonzero when any criterion fails.

use std::process::Command;
use std::time::Instant;

use pmod_core::generate::{inflated_module, InflatedSample};
use pmod_core::thin::{self, ex_dim3};
use pmod_core::{
    chamber_poset, check_fully_faithful, condense, detect_isotopy_subdivision, end_dim, fixtures, hom_space, random_thin_module,
    verify_condensation, verify_path_independence, Cell, ChamberError, FieldSpec, GridShape, Matrix, ModuleMap, PersistenceModule,
    Subdivision,
};
use rand::Rng;
use serde_json::Value;

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check, f64);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn pmod(args: &[&str]) -> (i32, Value) {
    let out = Command::new(env!("CARGO_BIN_EXE_pmod")).args(args).output().expect("spawn pmod");
    let body = serde_json::from_slice(&out.stdout).unwrap_or(Value::Null);
    (out.status.code().unwrap_or(-1), body)
}

fn ex_dim3_fixture() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut slowest = 0.0f64;
    for field in ["rational", "prime:5"] {
        for m in ["1", "2", "3", "-1"] {
            let t = Instant::now();
            let file = dir.path().join(format!("ex-{field}-{m}.json").replace(':', "_"));
            let file = file.to_str().unwrap();
            let (code, _) = pmod(&["gen", "--kind", "ex-dim3", "--m", m, "--field", field, "--out", file]);
            ensure(code == 0, || format!("gen failed for m={m} over {field}"))?;
            let (code, body) = pmod(&["interval-iso", file]);
            if m == "1" {
                ensure(code == 0 && body["natural"] == true, || format!("m=1 over {field}: exit {code}, {body}"))?;
            } else {
                ensure(code == 1 && body["kind"] == "NontrivialHolonomy", || format!("m={m} over {field}: exit {code}, {body}"))?;
                let f = FieldSpec::parse(field).unwrap();
                let module = ex_dim3(f, &f.from_i64(m.parse().unwrap())).map_err(|e| e.to_string())?;
                let q = thin::support_quiver(&module).map_err(|e| e.to_string())?;
                ensure(end_dim(&module) == 1, || format!("m={m} over {field}: end_dim {}", end_dim(&module)))?;
                ensure(q.components.len() == 1, || format!("m={m} over {field}: support not connected"))?;
            }
            slowest = slowest.max(t.elapsed().as_secs_f64());
        }
    }
    ensure(slowest < 1.0, || format!("slowest case took {slowest:.2}s"))?;
    Ok(format!("8 cases, slowest {slowest:.3}s"))
}

fn inflated_sample(seed: u64) -> InflatedSample {
    let mut rng = pmod_core::sample::rng(seed ^ 0xc0de);
    let shape = GridShape::new(&[rng.gen_range(2..=12), rng.gen_range(2..=12)]).unwrap();
    let field = if seed.is_multiple_of(2) { FieldSpec::Rational } else { FieldSpec::Prime(7) };
    inflated_module(field, &shape, 9, 3, !seed.is_multiple_of(3), seed).expect("three dims separate a planar layout")
}

fn round_trip() -> Check {
    let mut chambers = 0;
    for seed in 0..100 {
        let sample = inflated_sample(seed);
        let m = &sample.module;
        let s = detect_isotopy_subdivision(m).map_err(|e| format!("seed {seed}: {e}"))?;
        ensure(s.len() == sample.subdivision.len(), || format!("seed {seed}: {} chambers, generator has {}", s.len(), sample.subdivision.len()))?;
        let p = chamber_poset(&s).map_err(|e| format!("seed {seed}: {e}"))?;
        let c = condense(m, &s, &p).map_err(|e| format!("seed {seed}: {e}"))?;
        let alpha = verify_condensation(m, &c.module, &c.quantization).map_err(|e| format!("seed {seed}: {e}"))?;
        let pulled = c.module.inflate(&c.quantization).map_err(|e| e.to_string())?;
        ensure(alpha.is_isomorphism(&pulled, m), || format!("seed {seed}: alpha is not an isomorphism"))?;
        chambers += s.len();
    }
    Ok(format!("100/100 exact isomorphisms, {chambers} chambers"))
}

/// Every zigzag path of at most `max_len` steps in the full grid, compared
/// against `M(a∧b ≤ b) M(a∧b ≤ a)⁻¹`.
fn exhaustive_paths(m: &PersistenceModule, max_len: usize) -> Result<usize, String> {
    let shape = m.shape();
    let n = shape.len();
    let meet = |a: usize, b: usize| {
        let c: Vec<usize> = (0..shape.n()).map(|k| shape.coord(a, k).min(shape.coord(b, k))).collect();
        shape.index(&Cell::new(&c))
    };
    let reference: Vec<Vec<Matrix>> = (0..n)
        .map(|a| {
            (0..n)
                .map(|b| {
                    let w = meet(a, b);
                    let down = m.map_between_idx(w, a).invert().expect("isotopic");
                    m.map_between_idx(w, b).mul(&down).unwrap()
                })
                .collect()
        })
        .collect();
    let step = |a: usize, b: usize| if shape.leq_idx(a, b) { m.map_between_idx(a, b) } else { m.map_between_idx(b, a).invert().unwrap() };
    let steps: Vec<Vec<Option<Matrix>>> =
        (0..n).map(|a| (0..n).map(|b| (a != b && shape.comparable_idx(a, b)).then(|| step(a, b))).collect()).collect();
    let mut count = 0;
    fn walk(
        start: usize,
        cur: usize,
        acc: &Matrix,
        left: usize,
        steps: &[Vec<Option<Matrix>>],
        reference: &[Vec<Matrix>],
        count: &mut usize,
    ) -> Result<(), String> {
        *count += 1;
        if acc != &reference[start][cur] {
            return Err(format!("path from cell {start} to cell {cur} disagrees"));
        }
        if left == 0 {
            return Ok(());
        }
        for (next, s) in steps[cur].iter().enumerate() {
            if let Some(s) = s {
                walk(start, next, &s.mul(acc).unwrap(), left - 1, steps, reference, count)?;
            }
        }
        Ok(())
    }
    for a in 0..n {
        walk(a, a, &Matrix::identity(m.field(), m.dim(a)), max_len, &steps, &reference, &mut count)?;
    }
    Ok(count)
}

fn path_independence() -> Check {
    let mut regions = 0;
    for seed in 0..100 {
        let sample = inflated_sample(seed);
        for id in 0..sample.subdivision.len() {
            let region = sample.subdivision.region(id);
            let w = verify_path_independence(&sample.module, &region, 50, seed * 31 + id as u64).map_err(|e| format!("seed {seed}: {e}"))?;
            ensure(w.is_none(), || format!("seed {seed}, chamber {id}: two paths disagree"))?;
            regions += 1;
        }
    }
    let f2 = FieldSpec::Prime(2);
    let shape = GridShape::new(&[3, 3]).unwrap();
    let mut paths = 0;
    for (d, seed) in [(1, 0), (2, 1), (2, 2)] {
        let mut rng = pmod_core::sample::rng(seed);
        let g: Vec<Matrix> = (0..shape.len()).map(|_| pmod_core::sample::invertible(f2, d, &mut rng)).collect();
        let m = PersistenceModule::constant(f2, shape.clone(), d).twist(&g).map_err(|e| e.to_string())?;
        paths += exhaustive_paths(&m, 6)?;
    }
    Ok(format!("{regions} chambers x 50 pairs, {paths} exhaustive GF(2) paths"))
}

fn thin_decomposition() -> Check {
    let shape = GridShape::new(&[8, 8]).unwrap();
    let runs = (0..100).map(|s| (FieldSpec::Prime(5), s)).chain((0..20).map(|s| (FieldSpec::Rational, 1000 + s)));
    let mut components = 0;
    for (field, seed) in runs {
        let m = random_thin_module(field, shape.clone(), 0.7, seed).map_err(|e| e.to_string())?;
        let report = thin::decompose(&m, 100, seed).map_err(|e| format!("seed {seed}: {e}"))?;
        for c in &report.components {
            ensure(c.interval_support && c.vanishing_pair.is_none() && c.holonomy.is_empty() && c.alpha.is_some(), || {
                format!("seed {seed} over {field:?}: component at {} fails", c.cells[0])
            })?;
        }
        let parts = thin::split_components(&m).map_err(|e| e.to_string())?;
        let sum: usize = parts.iter().flat_map(|a| parts.iter().map(move |b| hom_space(a, b).unwrap().dim())).sum();
        let end = end_dim(&m);
        ensure(end == sum, || format!("seed {seed}: end_dim {end} but summands give {sum}"))?;
        components += parts.len();
    }
    Ok(format!("120/120 modules, {components} interval summands"))
}

fn counterexamples() -> Check {
    let q = FieldSpec::Rational;
    let (m, labels) = fixtures::axes_cross(q, 3);
    let s = Subdivision::from_assignment(m.shape().clone(), labels).map_err(|e| e.to_string())?;
    let p = chamber_poset(&s).map_err(|e| e.to_string())?;
    let first = condense(&m, &s, &p).err();
    ensure(matches!(first, Some(ChamberError::WellDefinednessFailure(_))), || format!("axes cross: {first:?}"))?;
    ensure(format!("{first:?}") == format!("{:?}", condense(&m, &s, &p).err()), || "axes cross: nondeterministic".into())?;

    let m = fixtures::punctured_plane(q, 2);
    let e = detect_isotopy_subdivision(&m).err();
    let centre = Cell::new(&[2, 2]);
    ensure(matches!(&e, Some(ChamberError::NonConvexChamber { witness, .. }) if witness.middle == centre), || format!("punctured plane: {e:?}"))?;
    ensure(detect_isotopy_subdivision(&m).err() == e, || "punctured plane: nondeterministic".into())?;
    Ok("WellDefinednessFailure on the axes cross, NonConvexChamber at the puncture".into())
}

fn fully_faithful() -> Check {
    let mut accepted = 0;
    let mut seed = 0;
    while accepted < 25 {
        let sample = inflated_sample(5000 + seed);
        seed += 1;
        if sample.subdivision.check(&sample.module).is_err() {
            continue;
        }
        let poset = chamber_poset(&sample.subdivision).map_err(|e| e.to_string())?;
        let field = sample.module.field();
        let w = check_fully_faithful(field, &poset, &sample.quantization, 2, 4, seed).map_err(|e| e.to_string())?;
        ensure(w.is_none(), || format!("subdivision {seed}: {w:?}"))?;
        accepted += 1;
    }
    Ok("100/100 hom dimensions preserved".into())
}

/// All valid thin modules on the 2×2 grid over GF(2).
fn thin_2x2() -> Vec<PersistenceModule> {
    let f = FieldSpec::Prime(2);
    let shape = GridShape::new(&[2, 2]).unwrap();
    let arrows: Vec<(usize, usize, usize)> = shape.arrows().collect();
    let mut out = Vec::new();
    for mask in 0u32..16 {
        let dims: Vec<usize> = (0..4).map(|i| ((mask >> i) & 1) as usize).collect();
        for bits in 0u32..(1 << arrows.len()) {
            let value = |a: usize| (bits >> a) & 1;
            let live = |a: usize| dims[arrows[a].0] == 1 && dims[arrows[a].2] == 1;
            if (0..arrows.len()).any(|a| !live(a) && value(a) == 1) {
                continue;
            }
            let m = PersistenceModule::from_arrows(f, shape.clone(), dims.clone(), |i, k, j| {
                let a = arrows.iter().position(|&x| x == (i, k, j)).unwrap();
                if live(a) {
                    Matrix::scalar(f, f.from_i64(value(a) as i64))
                } else {
                    Matrix::zeros(f, dims[j], dims[i])
                }
            })
            .unwrap();
            if m.validate().is_ok() {
                out.push(m);
            }
        }
    }
    out
}

fn brute_force_hom(a: &PersistenceModule, b: &PersistenceModule) -> usize {
    let f = a.field();
    let cells: Vec<usize> = (0..4).filter(|&i| a.dim(i) == 1 && b.dim(i) == 1).collect();
    (0u32..(1 << cells.len()))
        .filter(|bits| {
            let mats = (0..4)
                .map(|i| match cells.iter().position(|&c| c == i) {
                    Some(k) => Matrix::scalar(f, f.from_i64(((bits >> k) & 1) as i64)),
                    None => Matrix::zeros(f, b.dim(i), a.dim(i)),
                })
                .collect();
            ModuleMap::new(mats).is_natural(a, b)
        })
        .count()
}

fn hom_oracle() -> Check {
    let modules = thin_2x2();
    ensure(modules.len() * modules.len() <= 10_000, || format!("{} pairs", modules.len().pow(2)))?;
    for a in &modules {
        for b in &modules {
            let dim = hom_space(a, b).map_err(|e| e.to_string())?.dim();
            let count = brute_force_hom(a, b);
            ensure(1usize << dim == count, || format!("dims {:?} -> {:?}: solver {dim}, brute force {count}", a.dims(), b.dims()))?;
        }
    }
    Ok(format!("{} pairs of {} modules", modules.len().pow(2), modules.len()))
}

fn main() {
    let checks: [Criterion; 7] = [
        ("ex-dim3 fixture", ex_dim3_fixture, 8.0),
        ("condensation round trip", round_trip, 30.0),
        ("path independence", path_independence, f64::INFINITY),
        ("thin decomposition", thin_decomposition, 60.0),
        ("counterexample fixtures", counterexamples, f64::INFINITY),
        ("fully faithful pullback", fully_faithful, f64::INFINITY),
        ("hom solver oracle", hom_oracle, 120.0),
    ];
    let mut failed = 0;
    for (n, (name, run, limit)) in checks.iter().enumerate() {
        let t = Instant::now();
        let outcome = run();
        let secs = t.elapsed().as_secs_f64();
        let outcome = outcome.and_then(|msg| if secs <= *limit { Ok(msg) } else { Err(format!("{msg}; over the {limit}s budget")) });
        match outcome {
            Ok(msg) => println!("PASS criterion {} {name}: {msg} ({secs:.2}s)", n + 1),
            Err(msg) => {
                failed += 1;
                println!("FAIL criterion {} {name}: {msg} ({secs:.2}s)", n + 1);
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
