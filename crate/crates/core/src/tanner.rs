//! Sparse bipartite (Tanner) graph representation of a parity-check matrix.
//!
//! A [`TannerGraph`] keeps both adjacency directions, `N(m)` for every check
//! and `M(n)` for every variable, sorted ascending. Edges are numbered
//! check-major: the edges of check 0 come first, in the order of its sorted
//! neighbor list, then check 1, and so on. Per-edge decoder state (check
//! reliabilities, SPA messages) is indexed by these ids.
//!
//! The alist reader and writer follow the layout of MacKay's code archive.

use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{check_len, Error, Result};

/// A hard-decision word over {0, 1}.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BinaryWord(Vec<u8>);

impl BinaryWord {
    pub fn new(bits: Vec<u8>) -> Result<Self> {
        if let Some(pos) = bits.iter().position(|&b| b > 1) {
            return Err(Error::param(format!(
                "bit {pos} has value {}, expected 0 or 1",
                bits[pos]
            )));
        }
        Ok(BinaryWord(bits))
    }

    pub fn zeros(len: usize) -> Self {
        BinaryWord(vec![0; len])
    }

    pub fn bits(&self) -> &[u8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Hamming weight.
    pub fn weight(&self) -> usize {
        self.0.iter().filter(|&&b| b == 1).count()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&b| b == 0)
    }

    pub fn flip(&mut self, i: usize) {
        self.0[i] ^= 1;
    }

    /// Number of positions where `self` and `other` differ.
    pub fn distance(&self, other: &BinaryWord) -> usize {
        self.0.iter().zip(&other.0).filter(|(a, b)| a != b).count()
    }

    pub fn to_bipolar(&self) -> BipolarWord {
        BipolarWord(self.0.iter().map(|&b| 1 - 2 * b as i8).collect())
    }

    pub fn into_inner(self) -> Vec<u8> {
        self.0
    }
}

/// A word over {+1, -1}, the image of a [`BinaryWord`] under `b -> 1 - 2b`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BipolarWord(Vec<i8>);

impl BipolarWord {
    pub fn new(values: Vec<i8>) -> Result<Self> {
        if let Some(pos) = values.iter().position(|&v| v != 1 && v != -1) {
            return Err(Error::param(format!(
                "entry {pos} has value {}, expected +1 or -1",
                values[pos]
            )));
        }
        Ok(BipolarWord(values))
    }

    pub fn ones(len: usize) -> Self {
        BipolarWord(vec![1; len])
    }

    pub fn values(&self) -> &[i8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn to_binary(&self) -> BinaryWord {
        BinaryWord(self.0.iter().map(|&v| ((1 - v) / 2) as u8).collect())
    }

    pub fn into_inner(self) -> Vec<i8> {
        self.0
    }
}

/// Parity-check matrix stored as dual adjacency lists.
///
/// Immutable once built; share it freely between decoders.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TannerGraph {
    n_vars: usize,
    check_neighbors: Vec<Vec<usize>>,
    var_neighbors: Vec<Vec<usize>>,
    // check_offsets[m] is the id of the first edge of check m; len M + 1
    check_offsets: Vec<usize>,
    // var_edges[i][k] is the edge id of (var_neighbors[i][k], i)
    var_edges: Vec<Vec<usize>>,
    dv: Option<usize>,
    dc: Option<usize>,
}

impl TannerGraph {
    /// Builds a graph from the variable lists of each check.
    ///
    /// Lists may arrive unsorted; duplicates, out-of-range indices and
    /// variables or checks without any edge are rejected.
    pub fn from_check_neighbors(n_vars: usize, checks: Vec<Vec<usize>>) -> Result<Self> {
        if n_vars == 0 {
            return Err(Error::InvalidGraph("graph has no variables".into()));
        }
        let mut check_neighbors = checks;
        let mut var_neighbors = vec![Vec::new(); n_vars];
        for (m, row) in check_neighbors.iter_mut().enumerate() {
            if row.is_empty() {
                return Err(Error::InvalidGraph(format!("check {m} has no variables")));
            }
            row.sort_unstable();
            for w in row.windows(2) {
                if w[0] == w[1] {
                    return Err(Error::InvalidGraph(format!(
                        "check {m} lists variable {} twice",
                        w[0]
                    )));
                }
            }
            for &i in row.iter() {
                if i >= n_vars {
                    return Err(Error::InvalidGraph(format!(
                        "check {m} references variable {i}, but there are only {n_vars}"
                    )));
                }
                // checks are visited in ascending order, so these stay sorted
                var_neighbors[i].push(m);
            }
        }
        if let Some(i) = var_neighbors.iter().position(Vec::is_empty) {
            return Err(Error::InvalidGraph(format!(
                "variable {i} is not checked by any parity check"
            )));
        }

        let mut check_offsets = Vec::with_capacity(check_neighbors.len() + 1);
        let mut total = 0;
        for row in &check_neighbors {
            check_offsets.push(total);
            total += row.len();
        }
        check_offsets.push(total);

        let var_edges = var_neighbors
            .iter()
            .enumerate()
            .map(|(i, checks)| {
                checks
                    .iter()
                    .map(|&m| {
                        let k = check_neighbors[m].binary_search(&i).expect("dual lists");
                        check_offsets[m] + k
                    })
                    .collect()
            })
            .collect();

        let dv = uniform_len(&var_neighbors);
        let dc = uniform_len(&check_neighbors);
        Ok(TannerGraph {
            n_vars,
            check_neighbors,
            var_neighbors,
            check_offsets,
            var_edges,
            dv,
            dc,
        })
    }

    /// Builds a graph from a dense 0/1 matrix given row by row.
    pub fn from_dense(rows: &[Vec<u8>]) -> Result<Self> {
        let n = rows.first().map_or(0, Vec::len);
        let mut checks = Vec::with_capacity(rows.len());
        for (m, row) in rows.iter().enumerate() {
            check_len(n, row.len())?;
            let mut nbrs = Vec::new();
            for (i, &h) in row.iter().enumerate() {
                match h {
                    0 => {}
                    1 => nbrs.push(i),
                    other => {
                        return Err(Error::InvalidGraph(format!(
                            "entry ({m}, {i}) is {other}, expected 0 or 1"
                        )))
                    }
                }
            }
            checks.push(nbrs);
        }
        Self::from_check_neighbors(n, checks)
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn n_checks(&self) -> usize {
        self.check_neighbors.len()
    }

    pub fn n_edges(&self) -> usize {
        *self.check_offsets.last().unwrap_or(&0)
    }

    /// `N(m)`, sorted ascending.
    pub fn check_neighbors(&self, m: usize) -> &[usize] {
        &self.check_neighbors[m]
    }

    /// `M(i)`, sorted ascending.
    pub fn var_neighbors(&self, i: usize) -> &[usize] {
        &self.var_neighbors[i]
    }

    pub fn all_check_neighbors(&self) -> &[Vec<usize>] {
        &self.check_neighbors
    }

    pub fn all_var_neighbors(&self) -> &[Vec<usize>] {
        &self.var_neighbors
    }

    /// Ids of the edges of check `m`, aligned with [`Self::check_neighbors`].
    pub fn check_edges(&self, m: usize) -> std::ops::Range<usize> {
        self.check_offsets[m]..self.check_offsets[m + 1]
    }

    /// Ids of the edges of variable `i`, aligned with [`Self::var_neighbors`].
    pub fn var_edges(&self, i: usize) -> &[usize] {
        &self.var_edges[i]
    }

    /// Dense id of the edge between check `m` and variable `i`, if present.
    pub fn edge_index(&self, m: usize, i: usize) -> Option<usize> {
        self.check_neighbors
            .get(m)?
            .binary_search(&i)
            .ok()
            .map(|k| self.check_offsets[m] + k)
    }

    /// Column weight, when every variable has the same degree.
    pub fn dv(&self) -> Option<usize> {
        self.dv
    }

    /// Row weight, when every check has the same degree.
    pub fn dc(&self) -> Option<usize> {
        self.dc
    }

    pub fn is_regular(&self) -> bool {
        self.dv.is_some() && self.dc.is_some()
    }

    pub fn max_var_degree(&self) -> usize {
        self.var_neighbors.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn max_check_degree(&self) -> usize {
        self.check_neighbors.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Mean check degree, `total_edges / M`.
    pub fn mean_check_degree(&self) -> f64 {
        self.n_edges() as f64 / self.n_checks() as f64
    }

    /// Design rate `1 - M/N`.
    pub fn design_rate(&self) -> f64 {
        1.0 - self.n_checks() as f64 / self.n_vars as f64
    }

    /// True rate `K/N` with `K = N - rank(H)` over GF(2).
    pub fn rate(&self) -> f64 {
        (self.n_vars - gf2_rank(self)) as f64 / self.n_vars as f64
    }

    /// Number of 4-cycles (pairs of checks sharing two or more variables,
    /// counted per shared variable pair).
    pub fn four_cycle_count(&self) -> usize {
        let mut count = 0;
        let mut seen = vec![0usize; self.n_checks()];
        for a in 0..self.n_checks() {
            for &i in &self.check_neighbors[a] {
                for &b in &self.var_neighbors[i] {
                    if b > a {
                        seen[b] += 1;
                    }
                }
            }
            for &i in &self.check_neighbors[a] {
                for &b in &self.var_neighbors[i] {
                    if b > a && seen[b] > 0 {
                        let s = seen[b];
                        count += s * (s - 1) / 2;
                        seen[b] = 0;
                    }
                }
            }
        }
        count
    }

    /// Checks that both adjacency directions describe the same edge set.
    pub fn validate(&self) -> Result<()> {
        for (m, row) in self.check_neighbors.iter().enumerate() {
            for &i in row {
                if i >= self.n_vars || self.var_neighbors[i].binary_search(&m).is_err() {
                    return Err(Error::InvalidGraph(format!(
                        "edge ({m}, {i}) missing from variable side"
                    )));
                }
            }
        }
        for (i, col) in self.var_neighbors.iter().enumerate() {
            for &m in col {
                if m >= self.n_checks() || self.check_neighbors[m].binary_search(&i).is_err() {
                    return Err(Error::InvalidGraph(format!(
                        "edge ({m}, {i}) missing from check side"
                    )));
                }
            }
        }
        Ok(())
    }
}

fn uniform_len(lists: &[Vec<usize>]) -> Option<usize> {
    let first = lists.first()?.len();
    lists.iter().all(|l| l.len() == first).then_some(first)
}

/// `s = x H^T` over GF(2).
pub fn syndrome(x: &BinaryWord, g: &TannerGraph) -> Result<BinaryWord> {
    check_len(g.n_vars(), x.len())?;
    let bits = x.bits();
    Ok(BinaryWord(
        g.all_check_neighbors()
            .iter()
            .map(|row| row.iter().fold(0u8, |acc, &i| acc ^ bits[i]))
            .collect(),
    ))
}

/// True if `x` satisfies every parity check.
pub fn is_codeword(x: &BinaryWord, g: &TannerGraph) -> Result<bool> {
    Ok(syndrome(x, g)?.is_zero())
}

struct LineCursor<'a> {
    lines: Vec<(usize, &'a str)>,
    pos: usize,
}

impl<'a> LineCursor<'a> {
    fn new(text: &'a str) -> Self {
        let lines = text
            .lines()
            .enumerate()
            .map(|(k, l)| (k + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty())
            .collect();
        LineCursor { lines, pos: 0 }
    }

    fn next(&mut self, what: &str) -> Result<(usize, Vec<usize>)> {
        let last = self.lines.last().map_or(0, |l| l.0);
        let (line, text) = *self.lines.get(self.pos).ok_or_else(|| {
            Error::alist(
                last + 1,
                format!("unexpected end of input, expected {what}"),
            )
        })?;
        self.pos += 1;
        let nums = text
            .split_whitespace()
            .map(|tok| {
                tok.parse::<usize>()
                    .map_err(|_| Error::alist(line, format!("invalid integer {tok:?} in {what}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok((line, nums))
    }
}

fn parse_neighbor_line(
    line: usize,
    nums: &[usize],
    degree: usize,
    max_degree: usize,
    range: usize,
    what: &str,
) -> Result<Vec<usize>> {
    if nums.len() > max_degree.max(degree) {
        return Err(Error::alist(
            line,
            format!(
                "{what} lists {} entries, more than the maximum degree {max_degree}",
                nums.len()
            ),
        ));
    }
    let nonzero: Vec<usize> = nums.iter().copied().take_while(|&v| v != 0).collect();
    if nums[nonzero.len()..].iter().any(|&v| v != 0) {
        return Err(Error::alist(
            line,
            format!("{what} has a nonzero entry after zero padding"),
        ));
    }
    if nonzero.len() != degree {
        return Err(Error::alist(
            line,
            format!(
                "{what} lists {} neighbors, degree line says {degree}",
                nonzero.len()
            ),
        ));
    }
    let mut out = Vec::with_capacity(degree);
    for &v in &nonzero {
        if v > range {
            return Err(Error::alist(
                line,
                format!("{what}: index {v} out of range 1..={range}"),
            ));
        }
        let idx = v - 1;
        if out.contains(&idx) {
            return Err(Error::alist(
                line,
                format!("{what}: duplicate neighbor {v}"),
            ));
        }
        out.push(idx);
    }
    Ok(out)
}

/// Parses a parity-check matrix in alist format.
///
/// Indices are 1-based in the file; trailing zero padding on neighbor lines
/// is accepted and dropped. The variable and check sections must describe
/// the same edge set.
pub fn parse_alist(text: &str) -> Result<TannerGraph> {
    let mut cur = LineCursor::new(text);

    let (line, header) = cur.next("the size line \"N M\"")?;
    let [n, m] = header[..] else {
        return Err(Error::alist(line, "expected two integers \"N M\""));
    };
    if n == 0 {
        return Err(Error::alist(line, "N must be positive"));
    }
    let (line, maxes) = cur.next("the maximum degree line")?;
    let [max_dv, max_dc] = maxes[..] else {
        return Err(Error::alist(
            line,
            "expected two integers \"max_dv max_dc\"",
        ));
    };

    let (line, var_deg) = cur.next("the variable degree line")?;
    if var_deg.len() != n {
        return Err(Error::alist(
            line,
            format!("expected {n} variable degrees, found {}", var_deg.len()),
        ));
    }
    if let Some(i) = var_deg.iter().position(|&d| d == 0) {
        return Err(Error::alist(
            line,
            format!("variable {} has degree 0", i + 1),
        ));
    }
    if let Some(&d) = var_deg.iter().find(|&&d| d > max_dv) {
        return Err(Error::alist(
            line,
            format!("variable degree {d} exceeds declared maximum {max_dv}"),
        ));
    }
    let (line, check_deg) = cur.next("the check degree line")?;
    if check_deg.len() != m {
        return Err(Error::alist(
            line,
            format!("expected {m} check degrees, found {}", check_deg.len()),
        ));
    }
    if let Some(j) = check_deg.iter().position(|&d| d == 0) {
        return Err(Error::alist(line, format!("check {} has degree 0", j + 1)));
    }
    if let Some(&d) = check_deg.iter().find(|&&d| d > max_dc) {
        return Err(Error::alist(
            line,
            format!("check degree {d} exceeds declared maximum {max_dc}"),
        ));
    }

    let mut var_lines = Vec::with_capacity(n);
    for (i, &deg) in var_deg.iter().enumerate() {
        let (line, nums) = cur.next("a variable neighbor line")?;
        let what = format!("variable {}", i + 1);
        var_lines.push((
            line,
            parse_neighbor_line(line, &nums, deg, max_dv, m, &what)?,
        ));
    }
    let mut checks = Vec::with_capacity(m);
    let mut check_lines = Vec::with_capacity(m);
    for (j, &deg) in check_deg.iter().enumerate() {
        let (line, nums) = cur.next("a check neighbor line")?;
        let what = format!("check {}", j + 1);
        checks.push(parse_neighbor_line(line, &nums, deg, max_dc, n, &what)?);
        check_lines.push(line);
    }
    if let Some(&(line, _)) = cur.lines.get(cur.pos) {
        return Err(Error::alist(line, "trailing data after the check section"));
    }

    // cross-check the two sections
    for (i, (line, var_checks)) in var_lines.iter().enumerate() {
        for &j in var_checks {
            if !checks[j].contains(&i) {
                return Err(Error::alist(
                    *line,
                    format!(
                        "variable {} lists check {}, which does not list it back",
                        i + 1,
                        j + 1
                    ),
                ));
            }
        }
    }
    for (j, row) in checks.iter().enumerate() {
        for &i in row {
            if !var_lines[i].1.contains(&j) {
                return Err(Error::alist(
                    check_lines[j],
                    format!(
                        "check {} lists variable {}, which does not list it back",
                        j + 1,
                        i + 1
                    ),
                ));
            }
        }
    }

    TannerGraph::from_check_neighbors(n, checks).map_err(|e| Error::alist(1, e.to_string()))
}

/// Writes `g` in alist format without zero padding.
pub fn write_alist(g: &TannerGraph) -> String {
    fn join<I: Iterator<Item = usize>>(it: I) -> String {
        it.map(|v| v.to_string()).collect::<Vec<_>>().join(" ")
    }
    let mut out = String::new();
    let _ = writeln!(out, "{} {}", g.n_vars(), g.n_checks());
    let _ = writeln!(out, "{} {}", g.max_var_degree(), g.max_check_degree());
    let _ = writeln!(out, "{}", join(g.all_var_neighbors().iter().map(Vec::len)));
    let _ = writeln!(
        out,
        "{}",
        join(g.all_check_neighbors().iter().map(Vec::len))
    );
    for col in g.all_var_neighbors() {
        let _ = writeln!(out, "{}", join(col.iter().map(|&m| m + 1)));
    }
    for row in g.all_check_neighbors() {
        let _ = writeln!(out, "{}", join(row.iter().map(|&i| i + 1)));
    }
    out
}

/// Maximum number of socket permutations tried by [`construct_regular`].
pub const CONSTRUCTION_RETRIES: usize = 10_000;

/// Random `(dv, dc)`-regular code with `n_vars` columns.
///
/// Each variable gets `dv` sockets; the sockets are shuffled and dealt to
/// checks `dc` at a time. A deal that puts the same variable twice on one
/// check is thrown away and reshuffled; if every deal fails, duplicates in one
/// deal are swapped away between checks.
pub fn construct_regular(n_vars: usize, dv: usize, dc: usize, seed: u64) -> Result<TannerGraph> {
    if dv < 2 {
        return Err(Error::param(format!(
            "column weight must be at least 2, got {dv}"
        )));
    }
    if dc < 2 || n_vars == 0 {
        return Err(Error::param(format!("invalid size n={n_vars}, dc={dc}")));
    }
    if (n_vars * dv) % dc != 0 {
        return Err(Error::param(format!(
            "n*dv = {} is not divisible by dc = {dc}",
            n_vars * dv
        )));
    }
    if dc > n_vars {
        return Err(Error::param(format!(
            "row weight {dc} exceeds code length {n_vars}"
        )));
    }
    let n_checks = n_vars * dv / dc;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sockets: Vec<usize> = (0..n_vars)
        .flat_map(|i| std::iter::repeat(i).take(dv))
        .collect();

    'retry: for _ in 0..CONSTRUCTION_RETRIES {
        sockets.shuffle(&mut rng);
        let mut checks = Vec::with_capacity(n_checks);
        for chunk in sockets.chunks(dc) {
            let mut row = chunk.to_vec();
            row.sort_unstable();
            if row.windows(2).any(|w| w[0] == w[1]) {
                continue 'retry;
            }
            checks.push(row);
        }
        return TannerGraph::from_check_neighbors(n_vars, checks);
    }
    // dense shapes almost never deal cleanly; repair one deal by swaps
    sockets.shuffle(&mut rng);
    if repair_duplicates(&mut sockets, dc, &mut rng) {
        let checks = sockets
            .chunks(dc)
            .map(|c| {
                let mut row = c.to_vec();
                row.sort_unstable();
                row
            })
            .collect();
        return TannerGraph::from_check_neighbors(n_vars, checks);
    }
    Err(Error::Construction(format!(
        "no duplicate-free ({dv}, {dc}) graph on {n_vars} variables"
    )))
}

/// Swaps sockets between rows until no row of `dc` sockets repeats a
/// variable. Returns false if the swap budget runs out.
fn repair_duplicates(sockets: &mut [usize], dc: usize, rng: &mut ChaCha8Rng) -> bool {
    let len = sockets.len();
    let row_has = |s: &[usize], row: usize, v: usize, skip: usize| {
        (row * dc..(row + 1) * dc).any(|k| k != skip && s[k] == v)
    };
    for _ in 0..1000 * len {
        let Some(p) = (0..len).find(|&p| row_has(sockets, p / dc, sockets[p], p)) else {
            return true;
        };
        let q = rng.gen_range(0..len);
        let (rp, rq) = (p / dc, q / dc);
        if rp != rq && !row_has(sockets, rq, sockets[p], q) && !row_has(sockets, rp, sockets[q], p)
        {
            sockets.swap(p, q);
        }
    }
    false
}

/// Removes 4-cycles by random edge swaps that preserve every node degree.
///
/// Returns the rebuilt graph, or an error if cycles remain after
/// `max_swaps` swaps.
pub fn remove_four_cycles(g: &TannerGraph, seed: u64, max_swaps: usize) -> Result<TannerGraph> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows: Vec<Vec<usize>> = g.all_check_neighbors().to_vec();
    let n_checks = rows.len();

    // first (check, var) edge lying on a 4-cycle
    let find_cycle_edge = |rows: &[Vec<usize>]| -> Option<(usize, usize)> {
        let mut cols = vec![Vec::new(); g.n_vars()];
        for (m, row) in rows.iter().enumerate() {
            for &i in row {
                cols[i].push(m);
            }
        }
        let mut seen = vec![usize::MAX; n_checks];
        for (a, row) in rows.iter().enumerate() {
            for &i in row {
                for &b in &cols[i] {
                    if b == a {
                        continue;
                    }
                    if seen[b] != usize::MAX && seen[b] != i {
                        return Some((a, i));
                    }
                    seen[b] = i;
                }
            }
            for &i in row {
                for &b in &cols[i] {
                    seen[b] = usize::MAX;
                }
            }
        }
        None
    };

    for _ in 0..max_swaps {
        let Some((a, i)) = find_cycle_edge(&rows) else {
            return TannerGraph::from_check_neighbors(g.n_vars(), rows);
        };
        // swap (a, i) with a random edge (b, k): a gets k, b gets i
        let b = rng.gen_range(0..n_checks);
        if b == a {
            continue;
        }
        let k = rows[b][rng.gen_range(0..rows[b].len())];
        if rows[a].contains(&k) || rows[b].contains(&i) {
            continue;
        }
        let pa = rows[a].iter().position(|&v| v == i).expect("edge");
        rows[a][pa] = k;
        let pb = rows[b].iter().position(|&v| v == k).expect("edge");
        rows[b][pb] = i;
    }
    if find_cycle_edge(&rows).is_none() {
        return TannerGraph::from_check_neighbors(g.n_vars(), rows);
    }
    Err(Error::Construction(format!(
        "4-cycles remain after {max_swaps} swaps"
    )))
}

/// Dense GF(2) row-echelon helper over 64-bit limbs.
struct Gf2Matrix {
    cols: usize,
    rows: Vec<Vec<u64>>,
}

impl Gf2Matrix {
    fn from_graph(g: &TannerGraph) -> Self {
        let limbs = g.n_vars().div_ceil(64);
        let rows = g
            .all_check_neighbors()
            .iter()
            .map(|row| {
                let mut r = vec![0u64; limbs];
                for &i in row {
                    r[i / 64] |= 1 << (i % 64);
                }
                r
            })
            .collect();
        Gf2Matrix {
            cols: g.n_vars(),
            rows,
        }
    }

    fn get(row: &[u64], c: usize) -> bool {
        row[c / 64] >> (c % 64) & 1 == 1
    }

    /// Reduced row echelon form; returns the pivot columns.
    fn reduce(&mut self) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..self.cols {
            if r == self.rows.len() {
                break;
            }
            let Some(p) = (r..self.rows.len()).find(|&k| Self::get(&self.rows[k], c)) else {
                continue;
            };
            self.rows.swap(r, p);
            let pivot = self.rows[r].clone();
            for k in 0..self.rows.len() {
                if k != r && Self::get(&self.rows[k], c) {
                    for (a, b) in self.rows[k].iter_mut().zip(&pivot) {
                        *a ^= b;
                    }
                }
            }
            pivots.push(c);
            r += 1;
        }
        pivots
    }
}

/// Rank of `H` over GF(2).
pub fn gf2_rank(g: &TannerGraph) -> usize {
    Gf2Matrix::from_graph(g).reduce().len()
}

/// A basis of the code (the null space of `H`), one word per dimension.
pub fn null_space_basis(g: &TannerGraph) -> Vec<BinaryWord> {
    let mut mat = Gf2Matrix::from_graph(g);
    let pivots = mat.reduce();
    let mut is_pivot = vec![false; g.n_vars()];
    for &p in &pivots {
        is_pivot[p] = true;
    }
    (0..g.n_vars())
        .filter(|&c| !is_pivot[c])
        .map(|free| {
            let mut w = vec![0u8; g.n_vars()];
            w[free] = 1;
            for (r, &p) in pivots.iter().enumerate() {
                if Gf2Matrix::get(&mat.rows[r], free) {
                    w[p] = 1;
                }
            }
            BinaryWord(w)
        })
        .collect()
}

/// XOR of the basis words `k` for which `select(k)` is true.
pub fn combine_basis(
    basis: &[BinaryWord],
    n_vars: usize,
    mut select: impl FnMut(usize) -> bool,
) -> BinaryWord {
    let mut w = vec![0u8; n_vars];
    for (k, b) in basis.iter().enumerate() {
        if select(k) {
            for (x, &y) in w.iter_mut().zip(b.bits()) {
                *x ^= y;
            }
        }
    }
    BinaryWord(w)
}

#[cfg(test)]
mod tests {
    use super::*;

    const SMALL_ALIST: &str = "3 2\n2 2\n1 2 1\n2 2\n1 0\n1 2\n2 0\n1 2\n2 3\n";

    fn small() -> TannerGraph {
        TannerGraph::from_dense(&[vec![1, 1, 0], vec![0, 1, 1]]).unwrap()
    }

    #[test]
    fn parses_small_matrix() {
        let g = parse_alist(SMALL_ALIST).unwrap();
        assert_eq!(g.all_check_neighbors(), &[vec![0, 1], vec![1, 2]]);
        assert_eq!(g.all_var_neighbors(), &[vec![0], vec![0, 1], vec![1]]);
        assert_eq!(g, small());
        assert_eq!(g.dc(), Some(2));
        assert_eq!(g.dv(), None);
    }

    #[test]
    fn parse_write_roundtrip() {
        let g = small();
        let text = write_alist(&g);
        assert!(!text
            .lines()
            .skip(4)
            .any(|l| l.split_whitespace().any(|t| t == "0")));
        assert_eq!(parse_alist(&text).unwrap(), g);

        let g = construct_regular(20, 3, 4, 7).unwrap();
        let text = write_alist(&g);
        assert_eq!(text.lines().count(), 4 + 20 + 15);
        assert_eq!(parse_alist(&text).unwrap(), g);
    }

    #[test]
    fn alist_errors_carry_line_numbers() {
        let out_of_range = "3 2\n2 2\n1 2 1\n2 2\n1\n1 2\n2\n1 2\n2 4\n";
        match parse_alist(out_of_range) {
            Err(Error::Alist { line: 9, msg }) => assert!(msg.contains("out of range"), "{msg}"),
            other => panic!("unexpected {other:?}"),
        }
        let dup = "3 2\n2 2\n1 2 1\n2 2\n1\n1 1\n2\n1 2\n2 3\n";
        assert!(matches!(
            parse_alist(dup),
            Err(Error::Alist { line: 6, .. })
        ));
        let count = "3 2\n2 2\n1 2 1\n2 2\n1 2\n1 2\n2\n1 2\n2 3\n";
        assert!(matches!(
            parse_alist(count),
            Err(Error::Alist { line: 5, .. })
        ));
        let header = "3\n";
        assert!(matches!(
            parse_alist(header),
            Err(Error::Alist { line: 1, .. })
        ));
        let inconsistent = "3 2\n2 2\n1 2 1\n2 2\n1\n1 2\n2\n1 3\n2 3\n";
        assert!(matches!(
            parse_alist(inconsistent),
            Err(Error::Alist { .. })
        ));
        let degree0 = "3 2\n2 2\n1 2 0\n2 1\n1\n1 2\n0\n1 2\n2\n";
        assert!(matches!(
            parse_alist(degree0),
            Err(Error::Alist { line: 3, .. })
        ));
        let truncated = "3 2\n2 2\n1 2 1\n2 2\n1\n1 2\n";
        assert!(matches!(parse_alist(truncated), Err(Error::Alist { .. })));
    }

    #[test]
    fn degree_zero_variable_rejected() {
        let err = TannerGraph::from_dense(&[vec![1, 1, 0], vec![1, 1, 0]]).unwrap_err();
        assert!(matches!(err, Error::InvalidGraph(_)));
    }

    #[test]
    fn regular_construction() {
        let g = construct_regular(20, 3, 4, 7).unwrap();
        assert_eq!(g.n_checks(), 15);
        assert_eq!(g.dv(), Some(3));
        assert_eq!(g.dc(), Some(4));
        assert!(g.all_var_neighbors().iter().all(|c| c.len() == 3));
        assert!(g.all_check_neighbors().iter().all(|r| r.len() == 4));
        g.validate().unwrap();
        assert_eq!(g, construct_regular(20, 3, 4, 7).unwrap());
        assert_ne!(g, construct_regular(20, 3, 4, 8).unwrap());

        assert!(matches!(
            construct_regular(10, 3, 4, 1),
            Err(Error::InvalidParameter(_))
        ));
        assert!(matches!(
            construct_regular(12, 1, 4, 1),
            Err(Error::InvalidParameter(_))
        ));
    }

    #[test]
    fn four_cycle_removal_keeps_degrees() {
        let g = construct_regular(96, 3, 6, 1).unwrap();
        let h = remove_four_cycles(&g, 2, 10_000).unwrap();
        assert_eq!(h.four_cycle_count(), 0);
        assert_eq!(h.dv(), Some(3));
        assert_eq!(h.dc(), Some(6));
        h.validate().unwrap();
    }

    #[test]
    fn four_cycle_count_on_known_matrix() {
        // rows 0 and 1 share columns 0 and 1
        let g = TannerGraph::from_dense(&[vec![1, 1, 1, 0], vec![1, 1, 0, 1], vec![0, 0, 1, 1]])
            .unwrap();
        assert_eq!(g.four_cycle_count(), 1);
    }

    #[test]
    fn edge_index_is_bijection() {
        let g = construct_regular(20, 3, 4, 3).unwrap();
        let mut seen = vec![false; g.n_edges()];
        for m in 0..g.n_checks() {
            for (k, &i) in g.check_neighbors(m).iter().enumerate() {
                let e = g.edge_index(m, i).unwrap();
                assert_eq!(e, g.check_edges(m).start + k);
                assert!(!seen[e]);
                seen[e] = true;
            }
        }
        assert!(seen.iter().all(|&s| s));
        for i in 0..g.n_vars() {
            for (&m, &e) in g.var_neighbors(i).iter().zip(g.var_edges(i)) {
                assert_eq!(g.edge_index(m, i), Some(e));
            }
        }
        assert_eq!(
            g.edge_index(0, 19).is_some(),
            g.check_neighbors(0).contains(&19)
        );
    }

    #[test]
    fn dense_shapes_fall_back_to_repair() {
        for seed in 0..20 {
            let g = construct_regular(48, 4, 8, seed).unwrap();
            assert_eq!((g.dv(), g.dc()), (Some(4), Some(8)));
        }
        let g = construct_regular(16, 5, 10, 1).unwrap();
        assert_eq!((g.dv(), g.dc()), (Some(5), Some(10)));
    }

    #[test]
    fn syndrome_small() {
        let g = small();
        let x = BinaryWord::new(vec![1, 1, 0]).unwrap();
        assert_eq!(syndrome(&x, &g).unwrap().bits(), &[0, 1]);
        assert!(syndrome(&BinaryWord::zeros(3), &g).unwrap().is_zero());
        assert!(matches!(
            syndrome(&BinaryWord::zeros(4), &g),
            Err(Error::LengthMismatch {
                expected: 3,
                got: 4
            })
        ));
    }

    #[test]
    fn null_space_words_are_codewords() {
        let g = construct_regular(20, 3, 4, 7).unwrap();
        let basis = null_space_basis(&g);
        assert_eq!(basis.len(), 20 - gf2_rank(&g));
        assert!(!basis.is_empty());
        for mask in 0u32..(1 << basis.len()) {
            let w = combine_basis(&basis, 20, |k| mask >> k & 1 == 1);
            assert!(syndrome(&w, &g).unwrap().is_zero());
        }
    }

    #[test]
    fn word_conversions() {
        let b = BinaryWord::new(vec![0, 1, 1, 0]).unwrap();
        assert_eq!(b.to_bipolar().values(), &[1, -1, -1, 1]);
        assert_eq!(b.to_bipolar().to_binary(), b);
        assert!(BinaryWord::new(vec![2]).is_err());
        assert!(BipolarWord::new(vec![0]).is_err());
    }
}
