//! Exact dynamic-programming reference for the weighted edit distance, with
//! full-matrix construction, the three output variants, and backtrack.
//!
//! Matrix orientation: rows follow the query (i = 0..=l_q), columns follow
//! the reference (j = 0..=l_r). Cell (i, j) holds the distance between the
//! query prefix of length i and the reference prefix of length j. A vertical
//! step consumes a query base (Delete), a horizontal step consumes a
//! reference base (Insert), a diagonal step consumes one of each
//! (Match/Mismatch). The semi-global variant reads the minimum of the last
//! row: query fully consumed against the best reference prefix span.

use std::fmt;

use crate::penalty::GapPenalties;
use crate::seq::{code_to_base, PackedSequence};
use crate::Mode;

const INF: i64 = i64::MAX / 4;

/// Fully materialized score matrix, `(l_q + 1) x (l_r + 1)`.
#[derive(Debug, Clone)]
pub struct ScoreMatrix {
    rows: usize,
    cols: usize,
    cells: Vec<i64>,
    q_codes: Vec<u8>,
    r_codes: Vec<u8>,
    gp: GapPenalties,
}

impl ScoreMatrix {
    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> i64 {
        self.cells[i * self.cols + j]
    }

    /// Minimum of the last row and the column where it first occurs.
    pub fn last_row_min(&self) -> (i64, usize) {
        let last = self.rows - 1;
        let mut best = (self.get(last, 0), 0);
        for j in 1..self.cols {
            let v = self.get(last, j);
            if v < best.0 {
                best = (v, j);
            }
        }
        best
    }

    /// Row-major CSV dump with the reference bases as the header row.
    /// Debugging aid; one line per query row.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push(',');
        out.push('-');
        for &c in &self.r_codes {
            out.push(',');
            out.push(code_to_base(c));
        }
        out.push('\n');
        for i in 0..self.rows {
            if i == 0 {
                out.push('-');
            } else {
                out.push(code_to_base(self.q_codes[i - 1]));
            }
            for j in 0..self.cols {
                out.push(',');
                out.push_str(&self.get(i, j).to_string());
            }
            out.push('\n');
        }
        out
    }
}

/// Single edit event along an alignment path.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EditOp {
    Match,
    Mismatch,
    /// Consumes a reference base against a query gap.
    Insert,
    /// Consumes a query base against a reference gap.
    Delete,
}

impl EditOp {
    pub fn letter(&self) -> char {
        match self {
            EditOp::Match => 'M',
            EditOp::Mismatch => 'X',
            EditOp::Insert => 'I',
            EditOp::Delete => 'D',
        }
    }

    pub fn cost(&self, gp: &GapPenalties) -> i64 {
        match self {
            EditOp::Match => gp.match_cost,
            EditOp::Mismatch => gp.mismatch_cost,
            EditOp::Insert => gp.insert_cost,
            EditOp::Delete => gp.delete_cost,
        }
    }
}

/// Minimum-weight edit path from the mode's endpoint back to the origin,
/// stored front-to-back.
#[derive(Debug, Clone)]
pub struct AlignmentPath {
    pub ops: Vec<EditOp>,
    pub score: i64,
    /// Endpoint cell (query length consumed, reference length consumed).
    pub end: (usize, usize),
}

impl AlignmentPath {
    /// Run-length encoding, e.g. `3M1X2D`.
    pub fn cigar(&self) -> String {
        let mut out = String::new();
        let mut iter = self.ops.iter().peekable();
        while let Some(op) = iter.next() {
            let mut run = 1usize;
            while iter.peek() == Some(&op) {
                iter.next();
                run += 1;
            }
            out.push_str(&run.to_string());
            out.push(op.letter());
        }
        out
    }

    /// Sum of per-op penalties; always equals `score` for a valid path.
    pub fn replay_score(&self, gp: &GapPenalties) -> i64 {
        self.ops.iter().map(|op| op.cost(gp)).sum()
    }
}

fn dp_cells(q: &[u8], r: &[u8], gp: &GapPenalties) -> Vec<i64> {
    let rows = q.len() + 1;
    let cols = r.len() + 1;
    let mut cells = vec![0i64; rows * cols];
    for (j, cell) in cells.iter_mut().enumerate().take(cols).skip(1) {
        *cell = j as i64 * gp.insert_cost;
    }
    for i in 1..rows {
        cells[i * cols] = i as i64 * gp.delete_cost;
        let qc = q[i - 1];
        for j in 1..cols {
            let diag = if qc == r[j - 1] {
                gp.match_cost
            } else {
                gp.mismatch_cost
            };
            let v = (cells[(i - 1) * cols + j] + gp.delete_cost)
                .min(cells[i * cols + j - 1] + gp.insert_cost)
                .min(cells[(i - 1) * cols + j - 1] + diag);
            cells[i * cols + j] = v;
        }
    }
    cells
}

/// Build the full matrix for the pair under the given penalties.
pub fn full_matrix(q: &PackedSequence, r: &PackedSequence, gp: &GapPenalties) -> ScoreMatrix {
    let q_codes = q.codes();
    let r_codes = r.codes();
    let cells = dp_cells(&q_codes, &r_codes, gp);
    ScoreMatrix {
        rows: q_codes.len() + 1,
        cols: r_codes.len() + 1,
        cells,
        q_codes,
        r_codes,
        gp: *gp,
    }
}

/// Global distance: bottom-right cell of the matrix.
pub fn nw_distance(q: &PackedSequence, r: &PackedSequence, gp: &GapPenalties) -> i64 {
    nw_distance_codes(&q.codes(), &r.codes(), gp)
}

pub(crate) fn nw_distance_codes(q: &[u8], r: &[u8], gp: &GapPenalties) -> i64 {
    let cols = r.len() + 1;
    let cells = dp_cells(q, r, gp);
    cells[q.len() * cols + r.len()]
}

/// Semi-global distance: minimum over the last row, with the column of the
/// first (smallest-column) occurrence.
pub fn sw_distance(q: &PackedSequence, r: &PackedSequence, gp: &GapPenalties) -> (i64, usize) {
    sw_distance_codes(&q.codes(), &r.codes(), gp)
}

pub(crate) fn sw_distance_codes(q: &[u8], r: &[u8], gp: &GapPenalties) -> (i64, usize) {
    let cols = r.len() + 1;
    let cells = dp_cells(q, r, gp);
    let last = &cells[q.len() * cols..];
    let mut best = (last[0], 0usize);
    for (j, &v) in last.iter().enumerate().skip(1) {
        if v < best.0 {
            best = (v, j);
        }
    }
    best
}

/// Capped global distance: the exact value when it does not exceed `max_e`,
/// otherwise exactly `max_e`. Computation is confined to the diagonal band
/// that any path of cost <= `max_e` must stay inside.
pub fn lv_distance(q: &PackedSequence, r: &PackedSequence, gp: &GapPenalties, max_e: i64) -> i64 {
    lv_distance_codes(&q.codes(), &r.codes(), gp, max_e).0
}

/// Returns `(value, capped)`; `capped` is set when the true distance
/// exceeded `max_e` and the cap value was substituted.
pub(crate) fn lv_distance_codes(q: &[u8], r: &[u8], gp: &GapPenalties, max_e: i64) -> (i64, bool) {
    assert!(max_e >= 0, "cap must be non-negative");
    let lq = q.len() as i64;
    let lr = r.len() as i64;
    let min_indel = gp.insert_cost.min(gp.delete_cost);
    if min_indel <= 0 {
        // Band width is unbounded with free indels; fall back to the full
        // recurrence.
        let d = nw_distance_codes(q, r, gp);
        return if d <= max_e { (d, false) } else { (max_e, true) };
    }
    // Any path costing <= max_e keeps |i - j| within this half-width.
    let half = (max_e / min_indel + (lq - lr).abs() + 1) / 2;
    if (lq - lr).abs() > max_e / min_indel {
        return (max_e, true);
    }

    let cols = r.len() + 1;
    let mut prev = vec![INF; cols];
    let mut cur = vec![INF; cols];
    for (j, cell) in prev.iter_mut().enumerate() {
        if (j as i64) <= half {
            *cell = j as i64 * gp.insert_cost;
        }
    }
    for i in 1..=q.len() {
        cur.fill(INF);
        let lo = (i as i64 - half).max(0) as usize;
        let hi = ((i as i64 + half) as usize).min(r.len());
        if lo == 0 {
            cur[0] = i as i64 * gp.delete_cost;
        }
        let qc = q[i - 1];
        for j in lo.max(1)..=hi {
            let diag = if qc == r[j - 1] {
                gp.match_cost
            } else {
                gp.mismatch_cost
            };
            let v = (prev[j].saturating_add(gp.delete_cost))
                .min(cur[j - 1].saturating_add(gp.insert_cost))
                .min(prev[j - 1].saturating_add(diag));
            cur[j] = v;
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    let d = prev[r.len()];
    if d <= max_e {
        (d, false)
    } else {
        (max_e, true)
    }
}

/// Trace a minimum-weight path from the mode's endpoint to the origin.
/// Ties resolve diagonal first, then delete (vertical), then insert.
pub fn backtrack(m: &ScoreMatrix, mode: Mode) -> AlignmentPath {
    let last = m.rows - 1;
    let end_col = match mode {
        Mode::Sw => m.last_row_min().1,
        Mode::Nw | Mode::Lv => m.cols - 1,
    };
    let mut ops = Vec::new();
    let (mut i, mut j) = (last, end_col);
    while i > 0 || j > 0 {
        let here = m.get(i, j);
        if i > 0 && j > 0 {
            let is_match = m.q_codes[i - 1] == m.r_codes[j - 1];
            let diag_cost = if is_match {
                m.gp.match_cost
            } else {
                m.gp.mismatch_cost
            };
            if m.get(i - 1, j - 1) + diag_cost == here {
                ops.push(if is_match { EditOp::Match } else { EditOp::Mismatch });
                i -= 1;
                j -= 1;
                continue;
            }
        }
        if i > 0 && m.get(i - 1, j) + m.gp.delete_cost == here {
            ops.push(EditOp::Delete);
            i -= 1;
            continue;
        }
        debug_assert!(j > 0 && m.get(i, j - 1) + m.gp.insert_cost == here);
        ops.push(EditOp::Insert);
        j -= 1;
    }
    ops.reverse();
    AlignmentPath {
        ops,
        score: m.get(last, end_col),
        end: (last, end_col),
    }
}

impl fmt::Display for ScoreMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_csv())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seq(s: &str) -> PackedSequence {
        PackedSequence::from_text(s).unwrap()
    }

    fn canon() -> GapPenalties {
        GapPenalties::canonical()
    }

    #[test]
    fn worked_example_global_distance() {
        // LCS of the two 8-mers is 6; with mismatch 2 and unit indels the
        // distance is 8 + 8 - 2*6 = 4.
        let q = seq("AGCACACA");
        let r = seq("ACACAACT");
        assert_eq!(nw_distance(&q, &r, &canon()), 4);
        let m = full_matrix(&q, &r, &canon());
        assert_eq!(m.rows(), 9);
        assert_eq!(m.cols(), 9);
        assert_eq!(m.get(8, 8), 4);
    }

    #[test]
    fn worked_example_semi_global() {
        let q = seq("AGCACACA");
        let r = seq("ACACAACT");
        assert_eq!(sw_distance(&q, &r, &canon()), (2, 6));
    }

    #[test]
    fn identical_strings_score_zero() {
        let q = seq("ACGT");
        assert_eq!(nw_distance(&q, &q, &canon()), 0);
        // The only zero in the last row is the full-span column.
        assert_eq!(sw_distance(&q, &q, &canon()), (0, 4));
    }

    #[test]
    fn single_substitution() {
        let m = full_matrix(&seq("A"), &seq("C"), &canon());
        assert_eq!(m.get(1, 1), 2);
    }

    #[test]
    fn two_excess_query_bases_are_deletions() {
        assert_eq!(nw_distance(&seq("AAAA"), &seq("AA"), &canon()), 2);
        let m = full_matrix(&seq("AAAA"), &seq("AA"), &canon());
        let path = backtrack(&m, Mode::Nw);
        let deletes = path.ops.iter().filter(|o| **o == EditOp::Delete).count();
        assert_eq!(deletes, 2);
        assert_eq!(path.score, 2);
    }

    #[test]
    fn semi_global_all_mismatch_pair() {
        // Query ACGT against TTTT: cheapest is three deletions into the
        // one-base span ending at the T column.
        assert_eq!(sw_distance(&seq("ACGT"), &seq("TTTT"), &canon()), (3, 1));
    }

    #[test]
    fn lv_matches_global_below_cap_and_caps_above() {
        let q = seq("AGCACACA");
        let r = seq("ACACAACT");
        assert_eq!(lv_distance(&q, &r, &canon(), 10), 4);
        assert_eq!(lv_distance(&q, &r, &canon(), 3), 3);
        assert_eq!(lv_distance(&q, &q, &canon(), 0), 0);
    }

    #[test]
    fn backtrack_identical_strings() {
        let m = full_matrix(&seq("ACGT"), &seq("ACGT"), &canon());
        let path = backtrack(&m, Mode::Nw);
        assert_eq!(path.ops, vec![EditOp::Match; 4]);
        assert_eq!(path.score, 0);
        assert_eq!(path.cigar(), "4M");
    }

    #[test]
    fn backtrack_on_worked_example_replays_to_score() {
        let q = seq("AGCACACA");
        let r = seq("ACACAACT");
        let m = full_matrix(&q, &r, &canon());
        let nw = backtrack(&m, Mode::Nw);
        assert_eq!(nw.score, 4);
        assert_eq!(nw.replay_score(&canon()), 4);
        let sw = backtrack(&m, Mode::Sw);
        assert_eq!(sw.score, 2);
        assert_eq!(sw.end, (8, 6));
        assert_eq!(sw.replay_score(&canon()), 2);
    }

    #[test]
    fn csv_dump_has_header_and_all_rows() {
        let m = full_matrix(&seq("AG"), &seq("AC"), &canon());
        let csv = m.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 4);
        assert_eq!(lines[0], ",-,A,C");
        assert!(lines[1].starts_with("-,0,1,2"));
    }

    #[test]
    fn matrix_borders_follow_indel_costs() {
        let gp = GapPenalties::new(0, 3, 2, 5);
        let m = full_matrix(&seq("ACG"), &seq("TG"), &gp);
        for i in 0..m.rows() {
            assert_eq!(m.get(i, 0), i as i64 * 5);
        }
        for j in 0..m.cols() {
            assert_eq!(m.get(0, j), j as i64 * 2);
        }
    }
}
