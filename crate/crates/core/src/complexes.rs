//! Chromatic simplicial complexes.
//!
//! A complex is stored as the antichain of its facets; a simplex belongs to
//! the complex iff it is a subset of some facet. Vertices are `(name, value)`
//! pairs with `name` in `1..=n` and an opaque byte-string value.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt::{self, Write};

use crate::{Error, Result};

/// Opaque, comparison-stable vertex value.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Value(Vec<u8>);

impl Value {
    pub fn new(bytes: impl Into<Vec<u8>>) -> Self {
        Value(bytes.into())
    }

    /// Decimal text of `v`; the encoding used for output symbols.
    pub fn from_u64(v: u64) -> Self {
        Value(format!("{v}").into_bytes())
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.0
    }

    /// Parses back a value produced by [`Value::from_u64`].
    pub fn to_u64(&self) -> Option<u64> {
        core::str::from_utf8(&self.0).ok()?.parse().ok()
    }

    /// Length-prefixed canonical encoding.
    pub fn encode_into(&self, out: &mut Vec<u8>) {
        out.extend_from_slice(&(self.0.len() as u32).to_le_bytes());
        out.extend_from_slice(&self.0);
    }

    pub fn to_hex(&self) -> String {
        let mut s = String::with_capacity(self.0.len() * 2);
        for b in &self.0 {
            let _ = write!(s, "{b:02x}");
        }
        s
    }

    pub fn from_hex(hex: &str) -> Option<Self> {
        if !hex.len().is_multiple_of(2) {
            return None;
        }
        let bytes = (0..hex.len())
            .step_by(2)
            .map(|i| u8::from_str_radix(hex.get(i..i + 2)?, 16).ok())
            .collect::<Option<Vec<u8>>>()?;
        Some(Value(bytes))
    }
}

impl fmt::Debug for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match core::str::from_utf8(&self.0) {
            Ok(s) if s.chars().all(|c| c.is_ascii_graphic()) => write!(f, "{s:?}"),
            _ => write!(f, "0x{}", self.to_hex()),
        }
    }
}

impl From<&str> for Value {
    fn from(s: &str) -> Self {
        Value(s.as_bytes().to_vec())
    }
}

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Vertex {
    pub name: u32,
    pub value: Value,
}

impl Vertex {
    pub fn new(name: u32, value: impl Into<Value>) -> Self {
        Vertex {
            name,
            value: value.into(),
        }
    }
}

impl fmt::Debug for Vertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{:?})", self.name, self.value)
    }
}

/// A nonempty chromatic simplex: vertex names are pairwise distinct.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Simplex {
    // keyed by name, so iteration is in name order
    vertices: BTreeMap<u32, Value>,
}

impl Simplex {
    pub fn new(vertices: impl IntoIterator<Item = Vertex>) -> Result<Self> {
        let mut map = BTreeMap::new();
        for v in vertices {
            if v.name == 0 {
                return Err(Error::InvalidSimplex("vertex names start at 1".into()));
            }
            if map.insert(v.name, v.value).is_some() {
                return Err(Error::InvalidSimplex(format!("name {} appears twice", v.name)));
            }
        }
        if map.is_empty() {
            return Err(Error::InvalidSimplex("empty simplex".into()));
        }
        Ok(Simplex { vertices: map })
    }

    pub fn dimension(&self) -> usize {
        self.vertices.len() - 1
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn vertices(&self) -> impl Iterator<Item = Vertex> + '_ {
        self.vertices.iter().map(|(&name, value)| Vertex {
            name,
            value: value.clone(),
        })
    }

    pub fn names(&self) -> impl Iterator<Item = u32> + '_ {
        self.vertices.keys().copied()
    }

    pub fn value_of(&self, name: u32) -> Option<&Value> {
        self.vertices.get(&name)
    }

    pub fn contains_vertex(&self, v: &Vertex) -> bool {
        self.vertices.get(&v.name) == Some(&v.value)
    }

    pub fn is_face_of(&self, other: &Simplex) -> bool {
        self.len() <= other.len()
            && self
                .vertices
                .iter()
                .all(|(name, value)| other.vertices.get(name) == Some(value))
    }
}

impl Ord for Simplex {
    // (sorted names, then values); the export order
    fn cmp(&self, other: &Self) -> Ordering {
        self.vertices
            .keys()
            .cmp(other.vertices.keys())
            .then_with(|| self.vertices.values().cmp(other.vertices.values()))
    }
}

impl PartialOrd for Simplex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for Simplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.vertices()).finish()
    }
}

/// A chromatic complex on names `1..=n`, represented by its facets.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ChromaticComplex {
    n: usize,
    facets: BTreeSet<Simplex>,
}

impl ChromaticComplex {
    /// Builds the complex generated by `simplices`, keeping only maximal ones.
    pub fn from_simplices(n: usize, simplices: impl IntoIterator<Item = Simplex>) -> Result<Self> {
        let mut all: Vec<Simplex> = simplices.into_iter().collect();
        if let Some(bad) = all
            .iter()
            .flat_map(|s| s.names())
            .find(|&name| name as usize > n)
        {
            return Err(Error::InvalidSimplex(format!("name {bad} outside 1..={n}")));
        }
        all.sort_by_key(|s| core::cmp::Reverse(s.len()));
        all.dedup();
        let mut kept: Vec<Simplex> = Vec::with_capacity(all.len());
        for s in all {
            if !kept.iter().any(|k| s.is_face_of(k)) {
                kept.push(s);
            }
        }
        Ok(ChromaticComplex {
            n,
            facets: kept.into_iter().collect(),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn facets(&self) -> impl ExactSizeIterator<Item = &Simplex> {
        self.facets.iter()
    }

    pub fn facet_count(&self) -> usize {
        self.facets.len()
    }

    /// Membership: `s` is a face of some facet.
    pub fn contains(&self, s: &Simplex) -> bool {
        self.facets.iter().any(|f| s.is_face_of(f))
    }

    pub fn vertices(&self) -> BTreeSet<Vertex> {
        self.facets.iter().flat_map(|f| f.vertices()).collect()
    }

    pub fn dimension(&self) -> Option<usize> {
        self.facets.iter().map(Simplex::dimension).max()
    }

    pub fn is_pure(&self) -> bool {
        let mut dims = self.facets.iter().map(Simplex::dimension);
        match dims.next() {
            Some(d) => dims.all(|e| e == d),
            None => true,
        }
    }

    /// Every facet of `self` is a simplex of `other`.
    pub fn is_subcomplex_of(&self, other: &ChromaticComplex) -> bool {
        self.facets.iter().all(|f| other.contains(f))
    }

    /// Isolated vertices, i.e. facets of dimension 0.
    pub fn isolated_vertices(&self) -> impl Iterator<Item = Vertex> + '_ {
        self.facets
            .iter()
            .filter(|f| f.len() == 1)
            .flat_map(|f| f.vertices())
    }
}

/// Value projection of one facet: maximal groups of equal-valued vertices.
pub fn project_pi(facet: &Simplex) -> ChromaticComplex {
    let mut groups: BTreeMap<&Value, Vec<Vertex>> = BTreeMap::new();
    for (&name, value) in &facet.vertices {
        groups.entry(value).or_default().push(Vertex {
            name,
            value: value.clone(),
        });
    }
    let n = facet.names().max().unwrap_or(0) as usize;
    let simplices = groups
        .into_values()
        .map(|g| Simplex::new(g).expect("names of a simplex are distinct"));
    ChromaticComplex::from_simplices(n, simplices).expect("names within range")
}

/// Union of [`project_pi`] over all facets of `k`.
pub fn project_pi_complex(k: &ChromaticComplex) -> ChromaticComplex {
    let parts = k
        .facets()
        .flat_map(|f| project_pi(f).facets.into_iter().collect::<Vec<_>>());
    ChromaticComplex::from_simplices(k.n, parts).expect("names within range")
}

/// Whether `vertex_map` is a name-preserving simplicial map from `src` to `dst`.
///
/// Checking facets suffices: faces of a facet map to faces of its image.
pub fn check_simplicial_map(
    src: &ChromaticComplex,
    dst: &ChromaticComplex,
    vertex_map: &BTreeMap<Vertex, Vertex>,
) -> Result<bool> {
    for v in src.vertices() {
        if !vertex_map.contains_key(&v) {
            return Err(Error::MapIncomplete { name: v.name });
        }
    }
    for facet in src.facets() {
        let mut image = Vec::with_capacity(facet.len());
        for v in facet.vertices() {
            let w = &vertex_map[&v];
            if w.name != v.name {
                return Ok(false);
            }
            image.push(w.clone());
        }
        let image = Simplex::new(image).expect("name-preserving image stays chromatic");
        if !dst.contains(&image) {
            return Ok(false);
        }
    }
    Ok(true)
}

fn dot_label(v: &Vertex) -> String {
    let hex = v.value.to_hex();
    let digest = match core::str::from_utf8(v.value.as_bytes()) {
        Ok(s) if !s.is_empty() && s.len() <= 16 && s.chars().all(|c| c.is_ascii_alphanumeric()) => {
            String::from(s)
        }
        _ if hex.len() > 12 => String::from(&hex[..12]),
        _ => hex,
    };
    format!("{}:{}", v.name, digest)
}

/// 1-skeleton of `k` in Graphviz syntax, nodes and edges in sorted order.
pub fn export_dot(k: &ChromaticComplex) -> String {
    let vertices: Vec<Vertex> = k.vertices().into_iter().collect();
    let index: BTreeMap<&Vertex, usize> = vertices.iter().enumerate().map(|(i, v)| (v, i)).collect();
    let mut edges = BTreeSet::new();
    for f in k.facets() {
        let vs: Vec<Vertex> = f.vertices().collect();
        for (a, va) in vs.iter().enumerate() {
            for vb in &vs[a + 1..] {
                let (x, y) = (index[va], index[vb]);
                edges.insert((x.min(y), x.max(y)));
            }
        }
    }
    let mut out = String::from("graph complex {\n");
    for (i, v) in vertices.iter().enumerate() {
        let _ = writeln!(out, "  v{i} [label=\"{}\"];", dot_label(v));
    }
    for (a, b) in edges {
        let _ = writeln!(out, "  v{a} -- v{b};");
    }
    out.push_str("}\n");
    out
}
