//! Reference tables embedded as text fixtures, and the queries that
//! regenerate each cell.

use std::fmt;

use crate::constraints::Constraint;
use crate::engine::{Engine, EngineResult};
use crate::scalar::{parse_count, Count};

const SOURCES: [&str; 18] = [
    include_str!("../fixtures/table01.txt"),
    include_str!("../fixtures/table02.txt"),
    include_str!("../fixtures/table03.txt"),
    include_str!("../fixtures/table04.txt"),
    include_str!("../fixtures/table05.txt"),
    include_str!("../fixtures/table06.txt"),
    include_str!("../fixtures/table07.txt"),
    include_str!("../fixtures/table08.txt"),
    include_str!("../fixtures/table09.txt"),
    include_str!("../fixtures/table10.txt"),
    include_str!("../fixtures/table11.txt"),
    include_str!("../fixtures/table12.txt"),
    include_str!("../fixtures/table13.txt"),
    include_str!("../fixtures/table14.txt"),
    include_str!("../fixtures/table15.txt"),
    include_str!("../fixtures/table16.txt"),
    include_str!("../fixtures/table17.txt"),
    include_str!("../fixtures/table18.txt"),
];

/// One count the engine can evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Query {
    Rational { r: u8, d: u32, c: Constraint },
    Special { r: u8, d: u32, c: Constraint, u: u32, v: u32 },
    Rr2 { r: u8, d1: u32, d2: u32, g1: Constraint, g2: Constraint, k: u32, l: u32 },
    Nodal { r: u8, d: u32, c: Constraint },
    Elliptic { r: u8, d: u32, c: Constraint },
}

impl Engine {
    pub fn evaluate(&self, q: &Query) -> EngineResult<Count> {
        match *q {
            Query::Rational { r, d, c } => self.rational(r, d, &c),
            Query::Special { r, d, c, u, v } => self.special(r, d, &c, u, v),
            Query::Rr2 { r, d1, d2, g1, g2, k, l } => self.rr2(r, d1, d2, &g1, &g2, k, l),
            Query::Nodal { r, d, c } => self.nodal(r, d, &c),
            Query::Elliptic { r, d, c } => self.elliptic(r, d, &c),
        }
    }
}

/// A single expected value with the query that regenerates it.
#[derive(Debug, Clone)]
pub struct Cell {
    pub row: String,
    pub column: String,
    pub expected: Count,
    pub query: Query,
}

/// Column of a nodal table: node on a codim-`k` space, or the elliptic count.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodalColumn {
    Node(u32),
    Elliptic,
}

#[derive(Debug, Clone)]
pub struct NodalRow {
    pub tangencies: u32,
    pub cells: Vec<Option<Count>>,
}

#[derive(Debug, Clone)]
pub enum Body {
    /// `(degree, constraint, u, v, value)`
    Special(Vec<(u32, Constraint, u32, u32, Count)>),
    /// `(d1, d2, g1, g2, k, l, value)`
    Rr2(Vec<(u32, u32, Constraint, Constraint, u32, u32, Count)>),
    Nodal { d: u32, points: u32, columns: Vec<(String, NodalColumn)>, rows: Vec<NodalRow> },
}

#[derive(Debug, Clone)]
pub struct Table {
    pub id: u32,
    pub title: String,
    pub r: u8,
    pub body: Body,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FixtureError(pub String);

impl fmt::Display for FixtureError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "bad fixture: {}", self.0)
    }
}

impl std::error::Error for FixtureError {}

/// All embedded tables, in order.
pub fn all() -> Vec<Table> {
    SOURCES.iter().map(|s| parse(s).expect("embedded fixtures are well formed")).collect()
}

pub fn get(id: u32) -> Option<Table> {
    let src = SOURCES.get(usize::try_from(id).ok()?.checked_sub(1)?)?;
    Some(parse(src).expect("embedded fixtures are well formed"))
}

/// Node codimension for a column label such as `N_l`.
pub fn column_codim(label: &str, r: u8) -> Option<NodalColumn> {
    let r = u32::from(r);
    let k = match label {
        "J" => return Some(NodalColumn::Elliptic),
        "N" => 0,
        "N_f" => r.checked_sub(4)?,
        "N_b" => r.checked_sub(3)?,
        "N_s" => r.checked_sub(2)?,
        "N_l" => r - 1,
        "N_p" => r,
        _ => return None,
    };
    Some(NodalColumn::Node(k))
}

fn tuple(text: &str) -> Result<Vec<u32>, FixtureError> {
    text.split(',')
        .map(|x| x.trim().parse().map_err(|_| FixtureError(format!("bad number in `{text}`"))))
        .collect()
}

/// `(t, c2, ..., cr)` as a constraint.
pub fn decode_constraint(values: &[u32], r: u8) -> Result<Constraint, FixtureError> {
    if values.len() != usize::from(r) {
        return Err(FixtureError(format!("expected {r} entries, got {values:?}")));
    }
    let mut c = Constraint::empty().with_tangencies(values[0]);
    for (i, &n) in values.iter().enumerate().skip(1) {
        if n > 0 {
            c = c.with_incidence(i as u32 + 1, n);
        }
    }
    Ok(c)
}

fn pair(text: &str) -> Result<(u32, u32), FixtureError> {
    match tuple(text)?.as_slice() {
        &[a, b] => Ok((a, b)),
        _ => Err(FixtureError(format!("expected a pair, got `{text}`"))),
    }
}

fn value(text: &str) -> Result<Count, FixtureError> {
    parse_count(text).ok_or_else(|| FixtureError(format!("bad value `{text}`")))
}

pub fn parse(src: &str) -> Result<Table, FixtureError> {
    let mut id = None;
    let mut title = String::new();
    let mut kind = None;
    let mut r = None;
    let mut d = None;
    let mut points = 0;
    let mut columns = Vec::new();
    let mut data = Vec::new();
    for line in src.lines().map(str::trim).filter(|l| !l.is_empty()) {
        if let Some(comment) = line.strip_prefix('#') {
            if title.is_empty() {
                title = comment.trim().to_string();
            }
            continue;
        }
        let (head, rest) = line.split_once(' ').unwrap_or((line, ""));
        let num = || rest.trim().parse::<u32>().map_err(|_| FixtureError(format!("bad line `{line}`")));
        match head {
            "table" => id = Some(num()?),
            "kind" => kind = Some(rest.trim().to_string()),
            "r" => r = Some(u8::try_from(num()?).map_err(|_| FixtureError("r".into()))?),
            "d" => d = Some(num()?),
            "points" => points = num()?,
            "columns" => columns = rest.split_whitespace().map(str::to_string).collect(),
            _ => data.push(line.split_whitespace().collect::<Vec<_>>()),
        }
    }
    let id = id.ok_or_else(|| FixtureError("missing table id".into()))?;
    let r = r.ok_or_else(|| FixtureError("missing r".into()))?;
    let body = match kind.as_deref() {
        Some("special") => Body::Special(
            data.iter()
                .map(|f| {
                    let [deg, c, uv, v] = f.as_slice() else {
                        return Err(FixtureError(format!("bad row {f:?}")));
                    };
                    let (u, w) = pair(uv)?;
                    Ok((deg.parse().map_err(|_| FixtureError("degree".into()))?, decode_constraint(&tuple(c)?, r)?, u, w, value(v)?))
                })
                .collect::<Result<_, _>>()?,
        ),
        Some("rr2") => Body::Rr2(
            data.iter()
                .map(|f| {
                    let [degs, g1, g2, nodes, v] = f.as_slice() else {
                        return Err(FixtureError(format!("bad row {f:?}")));
                    };
                    let (d1, d2) = pair(degs)?;
                    let (k, l) = pair(nodes)?;
                    Ok((d1, d2, decode_constraint(&tuple(g1)?, r)?, decode_constraint(&tuple(g2)?, r)?, k, l, value(v)?))
                })
                .collect::<Result<_, _>>()?,
        ),
        Some("nodal") => {
            let d = d.ok_or_else(|| FixtureError("missing degree".into()))?;
            let columns = columns
                .into_iter()
                .map(|c| column_codim(&c, r).map(|k| (c.clone(), k)).ok_or(FixtureError(format!("column {c}"))))
                .collect::<Result<Vec<_>, _>>()?;
            let rows = data
                .iter()
                .map(|f| {
                    if f.len() != columns.len() + 1 {
                        return Err(FixtureError(format!("row {f:?} has the wrong width")));
                    }
                    let tangencies = f[0].parse().map_err(|_| FixtureError(format!("row {f:?}")))?;
                    let cells = f[1..]
                        .iter()
                        .map(|&x| if x == "-" { Ok(None) } else { value(x).map(Some) })
                        .collect::<Result<_, _>>()?;
                    Ok(NodalRow { tangencies, cells })
                })
                .collect::<Result<_, _>>()?;
            Body::Nodal { d, points, columns, rows }
        }
        other => return Err(FixtureError(format!("unknown kind {other:?}"))),
    };
    Ok(Table { id, title, r, body })
}

impl Table {
    /// Constraint for row `t` of a nodal table with the node on a codim-`k`
    /// space (`None` for the elliptic column): fixed points, `t`
    /// tangencies and codim-2 incidences filling the dimension.
    pub fn nodal_constraint(&self, t: u32, node: Option<u32>) -> Option<Constraint> {
        let Body::Nodal { d, points, .. } = &self.body else { return None };
        let r = u32::from(self.r);
        let dim = (r + 1) * d - 1;
        let used = t + node.unwrap_or(0) + points * (r - 1);
        let codim2 = dim.checked_sub(used)?;
        let mut c = Constraint::empty().with_tangencies(t).with_incidence(r, *points).with_incidence(2, codim2);
        if let Some(k) = node {
            c = c.with_node(k);
        }
        Some(c)
    }

    pub fn cells(&self) -> Vec<Cell> {
        let r = self.r;
        match &self.body {
            Body::Special(rows) => rows
                .iter()
                .map(|(d, c, u, v, val)| Cell {
                    row: format!("d={d} {c}"),
                    column: format!("({u},{v})"),
                    expected: val.clone(),
                    query: Query::Special { r, d: *d, c: *c, u: *u, v: *v },
                })
                .collect(),
            Body::Rr2(rows) => rows
                .iter()
                .map(|(d1, d2, g1, g2, k, l, val)| Cell {
                    row: format!("d={d1},{d2} {g1} / {g2}"),
                    column: format!("({k},{l})"),
                    expected: val.clone(),
                    query: Query::Rr2 { r, d1: *d1, d2: *d2, g1: *g1, g2: *g2, k: *k, l: *l },
                })
                .collect(),
            Body::Nodal { d, columns, rows, .. } => {
                let mut out = Vec::new();
                for row in rows {
                    for ((label, col), cell) in columns.iter().zip(&row.cells) {
                        let Some(expected) = cell else { continue };
                        let node = match col {
                            NodalColumn::Node(k) => Some(*k),
                            NodalColumn::Elliptic => None,
                        };
                        let c = self.nodal_constraint(row.tangencies, node).expect("fixture rows fit the dimension");
                        let query = match col {
                            NodalColumn::Node(_) => Query::Nodal { r, d: *d, c },
                            NodalColumn::Elliptic => Query::Elliptic { r, d: *d, c },
                        };
                        out.push(Cell {
                            row: format!("t={}", row.tangencies),
                            column: label.clone(),
                            expected: expected.clone(),
                            query,
                        });
                    }
                }
                out
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures_parse() {
        let tables = all();
        assert_eq!(tables.len(), 18);
        for (i, t) in tables.iter().enumerate() {
            assert_eq!(t.id as usize, i + 1);
            assert!(!t.cells().is_empty());
        }
        assert_eq!(get(7).unwrap().cells().len(), 21);
        assert!(get(0).is_none() && get(19).is_none());
    }

    #[test]
    fn nodal_rows_fill_dimension() {
        let t = get(13).unwrap();
        let c = t.nodal_constraint(0, Some(0)).unwrap();
        assert_eq!(c.count(3), 3);
        assert_eq!(c.count(2), 13);
    }
}
