//! Canonical JSON encodings: sorted keys, compact, one trailing LF.
//!
//! Prime-field entries are integers `0..p`; rational entries are strings
//! `"num/den"` in lowest terms (`"3"`, `"-2/7"`).

use serde_json::{json, Map, Value};
use thiserror::Error;

use crate::chambers::{ChamberError, Subdivision};
use crate::field::{FieldError, FieldSpec, Matrix, Scalar};
use crate::grid::{Cell, GridError, GridShape, PersistenceModule, ValidationReport, Violation, DEFAULT_ENTRY_BUDGET};
use crate::hom::HomSpace;
use crate::morphism::ModuleMap;
use crate::poset::{FinitePoset, PosetError, PosetModule};
use crate::thin::{DecompositionReport, Holonomy};
use crate::zigzag::{ZigzagError, ZigzagPath};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("invalid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("malformed document: {0}")]
    Malformed(String),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Poset(#[from] PosetError),
    #[error(transparent)]
    Chamber(#[from] ChamberError),
    #[error(transparent)]
    Zigzag(#[from] ZigzagError),
}

fn bad(what: impl Into<String>) -> IoError {
    IoError::Malformed(what.into())
}

/// Compact text with sorted keys and a final LF.
pub fn to_canonical_string(v: &Value) -> String {
    let mut s = serde_json::to_string(v).expect("values always serialize");
    s.push('\n');
    s
}

pub fn parse(text: &str) -> Result<Value, IoError> {
    Ok(serde_json::from_str(text)?)
}

fn get<'a>(v: &'a Value, key: &str) -> Result<&'a Value, IoError> {
    v.get(key).ok_or_else(|| bad(format!("missing key \"{key}\"")))
}

fn array<'a>(v: &'a Value, what: &str) -> Result<&'a Vec<Value>, IoError> {
    v.as_array().ok_or_else(|| bad(format!("{what} must be an array")))
}

fn object<'a>(v: &'a Value, what: &str) -> Result<&'a Map<String, Value>, IoError> {
    v.as_object().ok_or_else(|| bad(format!("{what} must be an object")))
}

fn uint(v: &Value, what: &str) -> Result<usize, IoError> {
    v.as_u64().map(|x| x as usize).ok_or_else(|| bad(format!("{what} must be a nonnegative integer")))
}

fn uints(v: &Value, what: &str) -> Result<Vec<usize>, IoError> {
    array(v, what)?.iter().map(|x| uint(x, what)).collect()
}

pub fn field_to_json(f: FieldSpec) -> Value {
    match f {
        FieldSpec::Prime(p) => json!({"kind": "prime", "p": p}),
        FieldSpec::Rational => json!({"kind": "rational"}),
    }
}

pub fn field_from_json(v: &Value) -> Result<FieldSpec, IoError> {
    match get(v, "kind")?.as_str() {
        Some("rational") => Ok(FieldSpec::Rational),
        Some("prime") => {
            let p = get(v, "p")?.as_u64().filter(|&p| p < 1 << 31).ok_or_else(|| bad("p must be an integer below 2^31"))?;
            Ok(FieldSpec::prime(p as u32)?)
        }
        _ => Err(bad("field kind must be \"prime\" or \"rational\"")),
    }
}

pub fn scalar_to_json(s: &Scalar) -> Value {
    match s {
        Scalar::Mod(x) => json!(x),
        Scalar::Rat(_) => json!(s.to_string()),
    }
}

pub fn scalar_from_json(f: FieldSpec, v: &Value) -> Result<Scalar, IoError> {
    match (f, v) {
        (FieldSpec::Prime(_), Value::Number(n)) => Ok(f.parse_scalar(&n.to_string())?),
        (FieldSpec::Rational, Value::String(s)) => Ok(f.parse_scalar(s)?),
        (FieldSpec::Rational, Value::Number(n)) if n.is_i64() => Ok(f.parse_scalar(&n.to_string())?),
        _ => Err(bad(format!("{v} is not a scalar of {f}"))),
    }
}

pub fn cell_to_json(c: &Cell) -> Value {
    json!(c.coords())
}

pub fn cell_from_json(v: &Value) -> Result<Cell, IoError> {
    let coords = uints(v, "cell")?;
    if coords.is_empty() || coords.len() > crate::grid::MAX_AXES {
        return Err(bad("cell must have 1 to 3 coordinates"));
    }
    Ok(Cell::new(&coords))
}

pub fn matrix_to_json(m: &Matrix) -> Value {
    json!({
        "rows": m.rows(),
        "cols": m.cols(),
        "data": m.data().iter().map(scalar_to_json).collect::<Vec<_>>(),
    })
}

pub fn matrix_from_json(f: FieldSpec, v: &Value) -> Result<Matrix, IoError> {
    let rows = uint(get(v, "rows")?, "rows")?;
    let cols = uint(get(v, "cols")?, "cols")?;
    let data = array(get(v, "data")?, "data")?.iter().map(|x| scalar_from_json(f, x)).collect::<Result<Vec<_>, _>>()?;
    Ok(Matrix::new(f, rows, cols, data)?)
}

pub fn module_to_json(m: &PersistenceModule) -> Value {
    let shape = m.shape();
    let mut maps = Map::new();
    for k in 0..shape.n() {
        let family: Vec<Value> = m.arrow_family(k).iter().flatten().map(matrix_to_json).collect();
        maps.insert(format!("axis{k}"), Value::Array(family));
    }
    json!({
        "field": field_to_json(m.field()),
        "shape": shape.sizes(),
        "dims": m.dims(),
        "maps": maps,
    })
}

pub fn module_from_json(v: &Value) -> Result<PersistenceModule, IoError> {
    module_from_json_with_budget(v, DEFAULT_ENTRY_BUDGET)
}

pub fn module_from_json_with_budget(v: &Value, budget: u64) -> Result<PersistenceModule, IoError> {
    let f = field_from_json(get(v, "field")?)?;
    let shape = GridShape::new(&uints(get(v, "shape")?, "shape")?)?;
    let dims = uints(get(v, "dims")?, "dims")?;
    let maps_obj = object(get(v, "maps")?, "maps")?;
    if maps_obj.len() != shape.n() {
        return Err(bad(format!("maps needs exactly the keys axis0..axis{}", shape.n() - 1)));
    }
    let mut maps = Vec::with_capacity(shape.n());
    for k in 0..shape.n() {
        let family = array(maps_obj.get(&format!("axis{k}")).ok_or_else(|| bad(format!("missing maps.axis{k}")))?, "axis maps")?;
        let mut it = family.iter();
        let mut slots = Vec::with_capacity(shape.len());
        for i in 0..shape.len() {
            slots.push(match shape.step(i, k) {
                Some(_) => {
                    let m = it.next().ok_or_else(|| bad(format!("axis{k} has too few matrices")))?;
                    Some(matrix_from_json(f, m)?)
                }
                None => None,
            });
        }
        if it.next().is_some() {
            return Err(bad(format!("axis{k} has too many matrices")));
        }
        maps.push(slots);
    }
    Ok(PersistenceModule::new_with_budget(f, shape, dims, maps, budget)?)
}

pub fn validation_to_json(r: &ValidationReport) -> Value {
    let violations: Vec<Value> = r
        .violations
        .iter()
        .map(|v| match v {
            Violation::Shape { cell, axis, expected, found } => json!({
                "kind": "shape", "cell": cell_to_json(cell), "axis": axis,
                "expected": [expected.0, expected.1], "found": [found.0, found.1],
            }),
            Violation::Square { cell, axes } => json!({"kind": "square", "cell": cell_to_json(cell), "axes": [axes.0, axes.1]}),
            Violation::Field { cell, axis } => json!({"kind": "field", "cell": cell_to_json(cell), "axis": axis}),
        })
        .collect();
    json!({"ok": r.is_ok(), "total": r.total, "violations": violations})
}

pub fn poset_module_to_json(h: &PosetModule) -> Value {
    let mut dims = Map::new();
    for (p, d) in h.dims().iter().enumerate() {
        dims.insert(p.to_string(), json!(d));
    }
    let mut mats = Map::new();
    for (&(p, q), m) in h.poset().hasse().iter().zip(h.edge_matrices()) {
        mats.insert(format!("{p}->{q}"), matrix_to_json(m));
    }
    json!({
        "field": field_to_json(h.field()),
        "elements": (0..h.poset().len()).collect::<Vec<_>>(),
        "hasse": h.poset().hasse().iter().map(|&(p, q)| json!([p, q])).collect::<Vec<_>>(),
        "dims": dims,
        "mats": mats,
    })
}

pub fn poset_module_from_json(v: &Value) -> Result<PosetModule, IoError> {
    let f = field_from_json(get(v, "field")?)?;
    let elements = uints(get(v, "elements")?, "elements")?;
    if elements.iter().enumerate().any(|(i, &e)| i != e) {
        return Err(bad("elements must be 0..n in order"));
    }
    let n = elements.len();
    let mut hasse = Vec::new();
    for e in array(get(v, "hasse")?, "hasse")? {
        let pair = uints(e, "hasse edge")?;
        if pair.len() != 2 || pair[0] >= n || pair[1] >= n {
            return Err(bad(format!("bad hasse edge {e}")));
        }
        hasse.push((pair[0], pair[1]));
    }
    let poset = FinitePoset::from_hasse(n, &hasse)?;
    let mut sorted = hasse.clone();
    sorted.sort_unstable();
    if sorted != poset.hasse() {
        return Err(bad("hasse lists a relation that is not a cover"));
    }
    let dims_obj = object(get(v, "dims")?, "dims")?;
    let dims = (0..n)
        .map(|p| uint(dims_obj.get(&p.to_string()).ok_or_else(|| bad(format!("missing dims.{p}")))?, "dim"))
        .collect::<Result<Vec<_>, _>>()?;
    let mats_obj = object(get(v, "mats")?, "mats")?;
    if mats_obj.len() != poset.hasse().len() {
        return Err(bad("one matrix per cover edge required"));
    }
    let mats = poset
        .hasse()
        .iter()
        .map(|&(p, q)| matrix_from_json(f, mats_obj.get(&format!("{p}->{q}")).ok_or_else(|| bad(format!("missing mats.{p}->{q}")))?))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(PosetModule::new(f, poset, dims, mats)?)
}

pub fn subdivision_to_json(s: &Subdivision) -> Value {
    let mut basepoints = Map::new();
    for c in s.chambers() {
        basepoints.insert(c.id.to_string(), cell_to_json(&s.shape().cell(c.basepoint)));
    }
    json!({
        "shape": s.shape().sizes(),
        "cell_to_chamber": s.assignment(),
        "basepoints": basepoints,
    })
}

pub fn subdivision_from_json(v: &Value) -> Result<Subdivision, IoError> {
    let shape = GridShape::new(&uints(get(v, "shape")?, "shape")?)?;
    let s = Subdivision::from_assignment(shape, uints(get(v, "cell_to_chamber")?, "cell_to_chamber")?)?;
    if let Some(bp) = v.get("basepoints") {
        let bp = object(bp, "basepoints")?;
        for c in s.chambers() {
            if let Some(given) = bp.get(&c.id.to_string()) {
                if cell_from_json(given)? != s.shape().cell(c.basepoint) {
                    return Err(bad(format!("basepoint of chamber {} must be its least cell", c.id)));
                }
            }
        }
    }
    Ok(s)
}

pub fn module_map_to_json(a: &ModuleMap) -> Value {
    json!({"mats": a.mats().iter().map(matrix_to_json).collect::<Vec<_>>()})
}

pub fn module_map_from_json(f: FieldSpec, v: &Value) -> Result<ModuleMap, IoError> {
    let mats = array(get(v, "mats")?, "mats")?.iter().map(|m| matrix_from_json(f, m)).collect::<Result<Vec<_>, _>>()?;
    Ok(ModuleMap::new(mats))
}

pub fn hom_to_json(h: &HomSpace) -> Value {
    json!({"dim": h.dim(), "basis": h.basis.iter().map(module_map_to_json).collect::<Vec<_>>()})
}

pub fn path_to_json(p: &ZigzagPath) -> Value {
    Value::Array(p.cells().iter().map(cell_to_json).collect())
}

pub fn path_from_json(v: &Value) -> Result<ZigzagPath, IoError> {
    let cells = array(v, "path")?.iter().map(cell_from_json).collect::<Result<Vec<_>, _>>()?;
    Ok(ZigzagPath::new(cells)?)
}

pub fn holonomy_to_json(h: &Holonomy) -> Value {
    json!({
        "edge": [cell_to_json(&h.edge.0), cell_to_json(&h.edge.1)],
        "cycle": h.cycle.iter().map(cell_to_json).collect::<Vec<_>>(),
        "holonomy": scalar_to_json(&h.value),
    })
}

pub fn report_to_json(r: &DecompositionReport) -> Value {
    let components: Vec<Value> = r
        .components
        .iter()
        .map(|c| {
            json!({
                "cells": c.cells.iter().map(cell_to_json).collect::<Vec<_>>(),
                "interval_support": c.interval_support,
                "nonvanishing": c.vanishing_pair.is_none(),
                "vanishing_pair": c.vanishing_pair.map(|(a, b)| json!([cell_to_json(&a), cell_to_json(&b)])),
                "holonomy": c.holonomy.iter().map(holonomy_to_json).collect::<Vec<_>>(),
                "alpha": c.alpha.as_ref().map(|a| a.iter().map(|(cell, s)| json!({"cell": cell_to_json(cell), "scalar": scalar_to_json(s)})).collect::<Vec<_>>()),
            })
        })
        .collect();
    json!({"all_intervals": r.all_intervals(), "components": components})
}
