//! Per-row candidate values for forward-arc flows across extreme points.
//!
//! The stage-graph solver only needs, for every row, a finite superset of
//! the values the row's forward arcs can carry in *some* extreme point.
//! Deleting a tree arc from a spanning-tree view of an extreme point splits
//! the grid in two, and the arc's flow equals the supply sum of the tail
//! side plus signed capacities of the restricted arcs crossing the cut.
//! Planarity confines which vertices the tail side can hold, which collapses
//! the supply sums to small interval-sum families; the crossing capacities
//! contribute signed multiplicity combinations of the distinct finite
//! capacity values. Each solvable family has its own shape of those two
//! ingredients, built here.
//!
//! Sets are supersets by design: a value that no extreme point attains costs
//! only time, while a missing value would break optimality. The oracle-based
//! tests drive exactly that superset contract.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::grid::{classify_instance, ArcId, GridSpec, InstanceCase, Vertex};

/// Hard ceiling on any intermediate candidate set; beyond this the state
/// graph would be hopeless anyway.
const MAX_CANDIDATE_VALUES: usize = 1_000_000;

/// Sorted candidate flow values for the forward arcs of every row.
///
/// Rows outside `band` can never carry flow in a feasible flow of the
/// classified instance, so they hold the singleton `{0}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CandidateValueSet {
    /// The family whose construction produced the sets.
    pub case: InstanceCase,
    /// One sorted, deduplicated value list per grid row.
    pub per_row: Vec<Vec<i64>>,
    /// Inclusive row range that may carry nonzero flow.
    pub band: (usize, usize),
}

impl CandidateValueSet {
    pub fn row(&self, l: usize) -> &[i64] {
        &self.per_row[l]
    }
}

/// Builds the candidate sets for whichever family [`classify_instance`]
/// picks; errors with [`Error::Unsupported`] when none applies.
pub fn candidate_sets(grid: &GridSpec) -> Result<CandidateValueSet> {
    match classify_instance(grid) {
        InstanceCase::TwoRowDownwardCaps { .. } => candidates_two_row_downward_caps(grid),
        InstanceCase::TwoTerminalRows { .. } => candidates_two_terminal_rows(grid),
        InstanceCase::SourcesOneRow { .. } => candidates_sources_one_row(grid),
        InstanceCase::Unsupported => Err(Error::Unsupported {
            reason: unsupported_reason(grid),
        }),
    }
}

fn unsupported_reason(grid: &GridSpec) -> String {
    let terminal_rows = grid.terminal_rows().len();
    let caps = grid.distinct_finite_caps(grid.arcs()).len();
    if caps > 0 {
        format!(
            "capacitated grid with terminals spread over {terminal_rows} rows; \
             only bands of at most two terminal rows (or two-row grids) are solvable"
        )
    } else {
        let source_rows: BTreeSet<usize> = grid.sources().map(|v| v.row).collect();
        format!(
            "uncapacitated grid with sources in {} rows and terminals in {terminal_rows} rows; \
             needs a single source row with no sink above it, or at most two terminal rows",
            source_rows.len()
        )
    }
}

/// Candidates when every terminal sits in a band of at most two rows.
///
/// Supply part: interval sums of either terminal row, prefix sums of both,
/// or suffix sums of both — the tail side of any cut meets the outer
/// boundary in one contiguous stretch, and all terminals lie on that
/// boundary once the grid is stripped to the band. Capacity part: signed
/// multiplicity combinations of the distinct finite capacities in the band.
pub fn candidates_two_terminal_rows(grid: &GridSpec) -> Result<CandidateValueSet> {
    let terminal_rows = grid.terminal_rows();
    if terminal_rows.len() > 2 {
        return Err(Error::CaseMismatch {
            reason: format!(
                "terminals occupy {} rows; this family needs at most two",
                terminal_rows.len()
            ),
        });
    }
    let band = match (terminal_rows.first(), terminal_rows.last()) {
        (Some(&a), Some(&b)) => (a, b),
        _ => (0, 0),
    };
    let budget = grid.total_supply() as i128;

    let supply = boundary_supply_sums(grid.row_supplies(band.0), grid.row_supplies(band.1))?;
    let caps = band_capacity_groups(grid, band);
    let combos = signed_cap_combos(&caps, -2 * budget, 2 * budget)?;
    let values = sumset(&supply, &combos, 0, budget)?;

    let distinct_caps = caps.len();
    finish(
        grid,
        InstanceCase::TwoTerminalRows { distinct_caps },
        band,
        values,
    )
}

/// Candidates for two-row grids: arbitrary forward capacities, any number
/// of terminals. The cut crosses at most one forward nontree arc (restricted
/// at zero or its own capacity) plus downward nontree arcs contributing
/// signed combinations of the distinct downward capacity values.
pub fn candidates_two_row_downward_caps(grid: &GridSpec) -> Result<CandidateValueSet> {
    if grid.rows() != 2 {
        return Err(Error::CaseMismatch {
            reason: format!("grid has {} rows; this family needs exactly two", grid.rows()),
        });
    }
    let budget = grid.total_supply() as i128;
    let supply = boundary_supply_sums(grid.row_supplies(0), grid.row_supplies(1))?;

    let mut crossing_forward: BTreeSet<i128> = BTreeSet::new();
    crossing_forward.insert(0);
    for arc in grid.arcs().filter(|a| a.is_forward()) {
        if let Some(u) = grid.capacity(arc).finite() {
            crossing_forward.insert(i128::from(u));
            crossing_forward.insert(-i128::from(u));
        }
    }

    let down_caps = capacity_groups(grid, grid.arcs().filter(|a| !a.is_forward()));
    let down_combos = signed_cap_combos(&down_caps, -2 * budget, 2 * budget)?;

    // Final values live in [0, budget]; widen each intermediate window by
    // the reach of the parts still to be added so no value is lost.
    let down_reach = set_reach(&down_combos);
    let partial = sumset(
        &supply,
        &crossing_forward,
        -down_reach.1,
        budget - down_reach.0,
    )?;
    let values = sumset(&partial, &down_combos, 0, budget)?;

    finish(
        grid,
        InstanceCase::TwoRowDownwardCaps {
            distinct_downward_caps: down_caps.len(),
        },
        (0, 1),
        values,
    )
}

/// Candidates for uncapacitated grids whose sources share one row with no
/// sink above it. Rows above the source row never carry flow. Relative to
/// the stripped grid, the cut's tail side meets the source row in an
/// interval or a complement of one, and every lower row in at most two
/// intervals or a complement; the candidate set is the row-wise sumset.
pub fn candidates_sources_one_row(grid: &GridSpec) -> Result<CandidateValueSet> {
    if let Some(arc) = grid.arcs().find(|&a| grid.capacity(a).finite().is_some()) {
        return Err(Error::CaseMismatch {
            reason: format!("arc {arc} is capacitated; this family is uncapacitated-only"),
        });
    }
    let source_rows: BTreeSet<usize> = grid.sources().map(|v| v.row).collect();
    if source_rows.len() > 1 {
        return Err(Error::CaseMismatch {
            reason: format!("sources occupy {} rows; this family needs one", source_rows.len()),
        });
    }
    let source_row = source_rows.first().copied().unwrap_or(0);
    if let Some(v) = grid.sinks().find(|v| v.row < source_row) {
        return Err(Error::CaseMismatch {
            reason: format!("sink at {v} lies above the source row {}", source_row + 1),
        });
    }

    let band = (source_row, grid.rows() - 1);
    let budget = grid.total_supply() as i128;

    // Per-row families of tail-side supply sums, in band order.
    let mut row_terms: Vec<BTreeSet<i128>> = Vec::new();
    for l in band.0..=band.1 {
        let row = grid.row_supplies(l);
        let intervals = interval_sums(row);
        let terms = if l == band.0 {
            let mut t = intervals.clone();
            t.extend(sumset_unbounded(&prefix_sums(row), &suffix_sums(row))?);
            t
        } else {
            let two = sumset_unbounded(&intervals, &intervals)?;
            let total: i128 = row.iter().map(|&b| i128::from(b)).sum();
            let mut t = two.clone();
            t.extend(two.iter().map(|v| total - v));
            t
        };
        row_terms.push(terms);
    }

    // Fold row by row; the window for each partial sum accounts for the
    // extremes the remaining rows can still contribute.
    let reaches: Vec<(i128, i128)> = row_terms.iter().map(set_reach).collect();
    let mut acc: BTreeSet<i128> = BTreeSet::new();
    acc.insert(0);
    for (i, terms) in row_terms.iter().enumerate() {
        let rest: (i128, i128) = reaches[i + 1..]
            .iter()
            .fold((0, 0), |(lo, hi), r| (lo + r.0, hi + r.1));
        acc = sumset(&acc, terms, -rest.1, budget - rest.0)?;
    }
    acc.retain(|v| (0..=budget).contains(v));

    finish(grid, InstanceCase::SourcesOneRow { source_row }, band, acc)
}

/// Converts the shared band-wide value set into per-row sorted vectors,
/// pruning each row by its own forward-capacity ceiling and assigning the
/// singleton zero set outside the band.
fn finish(
    grid: &GridSpec,
    case: InstanceCase,
    band: (usize, usize),
    values: BTreeSet<i128>,
) -> Result<CandidateValueSet> {
    let mut per_row = Vec::with_capacity(grid.rows());
    for l in 0..grid.rows() {
        if l < band.0 || l > band.1 || grid.cols() == 1 {
            per_row.push(vec![0]);
            continue;
        }
        let ceiling = row_forward_ceiling(grid, l);
        let row: Vec<i64> = values
            .iter()
            .filter(|&&v| ceiling.map_or(true, |c| v <= i128::from(c)))
            .map(|&v| v as i64)
            .collect();
        per_row.push(row);
    }
    Ok(CandidateValueSet {
        case,
        per_row,
        band,
    })
}

/// Largest finite forward capacity in the row, or `None` when some forward
/// arc there is unbounded (no row-wide ceiling then).
fn row_forward_ceiling(grid: &GridSpec, row: usize) -> Option<i64> {
    let mut max = i64::MIN;
    for t in 0..grid.cols() - 1 {
        match grid.capacity(ArcId::Forward(Vertex::new(row, t))).finite() {
            Some(u) => max = max.max(u),
            None => return None,
        }
    }
    Some(max)
}

/// Distinct finite capacity values with their arc counts over the band.
fn band_capacity_groups(grid: &GridSpec, band: (usize, usize)) -> Vec<(i64, usize)> {
    capacity_groups(
        grid,
        grid.arcs().filter(move |a| {
            let v = a.tail();
            match a {
                ArcId::Forward(_) => v.row >= band.0 && v.row <= band.1,
                ArcId::Down(_) => v.row >= band.0 && v.row + 1 <= band.1,
            }
        }),
    )
}

fn capacity_groups(grid: &GridSpec, arcs: impl Iterator<Item = ArcId>) -> Vec<(i64, usize)> {
    let mut groups: BTreeMap<i64, usize> = BTreeMap::new();
    for arc in arcs {
        if let Some(u) = grid.capacity(arc).finite() {
            *groups.entry(u).or_insert(0) += 1;
        }
    }
    groups.into_iter().collect()
}

/// All sums over a contiguous column range of the row, the empty range
/// included.
fn interval_sums(row: &[i64]) -> BTreeSet<i128> {
    let mut out = BTreeSet::new();
    out.insert(0);
    for i in 0..row.len() {
        let mut sum = 0i128;
        for &b in &row[i..] {
            sum += i128::from(b);
            out.insert(sum);
        }
    }
    out
}

/// Sums of the first `k` columns for every `k`, the empty prefix included.
fn prefix_sums(row: &[i64]) -> BTreeSet<i128> {
    let mut out = BTreeSet::new();
    let mut sum = 0i128;
    out.insert(sum);
    for &b in row {
        sum += i128::from(b);
        out.insert(sum);
    }
    out
}

/// Sums of the last `k` columns for every `k`, the empty suffix included.
fn suffix_sums(row: &[i64]) -> BTreeSet<i128> {
    let mut out = BTreeSet::new();
    let mut sum = 0i128;
    out.insert(sum);
    for &b in row.iter().rev() {
        sum += i128::from(b);
        out.insert(sum);
    }
    out
}

/// Supply sums the tail side of a cut can collect from the two boundary
/// rows. Both sides of a tree cut are connected, and every terminal lies on
/// the outer boundary cycle, so the tail side traces a *cyclic* interval of
/// that cycle: an interval of either row alone, prefixes of both rows,
/// suffixes of both rows — or, wrapping around, the complement of any of
/// those. The rows' supplies balance to zero across the band, so each
/// complement contributes exactly the negated sum.
fn boundary_supply_sums(top: &[i64], bottom: &[i64]) -> Result<BTreeSet<i128>> {
    let mut s = interval_sums(top);
    s.extend(interval_sums(bottom));
    s.extend(sumset_unbounded(&prefix_sums(top), &prefix_sums(bottom))?);
    s.extend(sumset_unbounded(&suffix_sums(top), &suffix_sums(bottom))?);
    let complements: Vec<i128> = s.iter().map(|&v| -v).collect();
    s.extend(complements);
    Ok(s)
}

/// All values of `sum_k m_k * cap_k` with `|m_k|` at most the arc count of
/// the k-th capacity, clipped to `[lo, hi]`. Each fold keeps any partial
/// value that the remaining groups could still pull into the window.
fn signed_cap_combos(groups: &[(i64, usize)], lo: i128, hi: i128) -> Result<BTreeSet<i128>> {
    let spans: Vec<i128> = groups
        .iter()
        .map(|&(cap, count)| i128::from(cap).abs() * count as i128)
        .collect();
    let mut acc: BTreeSet<i128> = BTreeSet::new();
    acc.insert(0);
    for (i, &(cap, count)) in groups.iter().enumerate() {
        let rest: i128 = spans[i + 1..].iter().sum();
        let multiples: BTreeSet<i128> = (-(count as i128)..=count as i128)
            .map(|m| m * i128::from(cap))
            .collect();
        acc = sumset(&acc, &multiples, lo - rest, hi + rest)?;
    }
    Ok(acc)
}

fn set_reach(set: &BTreeSet<i128>) -> (i128, i128) {
    match (set.first(), set.last()) {
        (Some(&lo), Some(&hi)) => (lo, hi),
        _ => (0, 0),
    }
}

/// `{a + b}` clipped to `[lo, hi]`, with a hard size guard.
fn sumset(
    a: &BTreeSet<i128>,
    b: &BTreeSet<i128>,
    lo: i128,
    hi: i128,
) -> Result<BTreeSet<i128>> {
    let mut out = BTreeSet::new();
    for &x in a {
        for &y in b {
            let v = x + y;
            if (lo..=hi).contains(&v) {
                out.insert(v);
            }
        }
        if out.len() > MAX_CANDIDATE_VALUES {
            return Err(Error::StateSpaceTooLarge {
                found: out.len() as u64,
                budget: MAX_CANDIDATE_VALUES as u64,
            });
        }
    }
    Ok(out)
}

fn sumset_unbounded(a: &BTreeSet<i128>, b: &BTreeSet<i128>) -> Result<BTreeSet<i128>> {
    sumset(a, b, i128::MIN / 4, i128::MAX / 4)
}
