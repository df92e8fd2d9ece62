//! Instance generators: lot-sizing models and hardness gadgets.
//!
//! The lot-sizing adapters express production planning directly as grid
//! flow. The knapsack and partition generators build the grid families that
//! witness where the problem turns NP-hard: each generated instance comes
//! with a [`Certificate`] whose threshold test on the optimal cost decides
//! the source problem, so the generators double as end-to-end fidelity
//! tests for any solver.
//!
//! Arcs a gadget must never use are realized as unbounded arcs with a
//! prohibitive fixed charge rather than capacity zero: a zero capacity
//! would change the instance's capacity profile and with it the case
//! classification the gadget is meant to exercise.

use crate::cost::CostSpec;
use crate::error::{Error, Result};
use crate::grid::{ArcId, GridSpec, Vertex};

/// Knapsack decision data: is there a subset of items with total value at
/// least `target` and total cost at most `budget`?
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KnapsackInstance {
    pub values: Vec<i64>,
    pub costs: Vec<i64>,
    pub budget: i64,
    pub target: i64,
}

impl KnapsackInstance {
    pub fn new(values: Vec<i64>, costs: Vec<i64>, budget: i64, target: i64) -> Result<Self> {
        if values.is_empty() || values.len() != costs.len() {
            return Err(Error::Parse(format!(
                "knapsack needs matching nonempty item lists, got {} values and {} costs",
                values.len(),
                costs.len()
            )));
        }
        for &v in values.iter().chain(costs.iter()) {
            if v <= 0 {
                return Err(Error::NonPositiveInput {
                    what: "knapsack item entry",
                    value: v,
                });
            }
        }
        if budget < 0 {
            return Err(Error::NonPositiveInput {
                what: "knapsack budget",
                value: budget,
            });
        }
        if target < 0 {
            return Err(Error::NonPositiveInput {
                what: "knapsack target",
                value: target,
            });
        }
        Ok(KnapsackInstance {
            values,
            costs,
            budget,
            target,
        })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Exhaustive decision for small item counts (≤ 24), `None` beyond.
    pub fn exhaustive_verdict(&self) -> Option<bool> {
        let n = self.len();
        if n > 24 {
            return None;
        }
        for mask in 0u32..(1u32 << n) {
            let mut value = 0i64;
            let mut cost = 0i64;
            for i in 0..n {
                if mask & (1 << i) != 0 {
                    value += self.values[i];
                    cost += self.costs[i];
                }
            }
            if value >= self.target && cost <= self.budget {
                return Some(true);
            }
        }
        Some(false)
    }
}

/// Partition decision data: can the values be split into two halves of
/// equal sum? Construction rejects odd totals outright.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartitionInstance {
    pub values: Vec<i64>,
}

impl PartitionInstance {
    pub fn new(values: Vec<i64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Parse("partition needs at least one value".into()));
        }
        for &v in &values {
            if v <= 0 {
                return Err(Error::NonPositiveInput {
                    what: "partition value",
                    value: v,
                });
            }
        }
        let total: i64 = values.iter().sum();
        if total % 2 != 0 {
            return Err(Error::OddTotal(total));
        }
        Ok(PartitionInstance { values })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn half_total(&self) -> i64 {
        self.values.iter().sum::<i64>() / 2
    }

    /// Subset-sum decision by table, `None` when the half-total exceeds a
    /// million and the table would be excessive.
    pub fn exhaustive_verdict(&self) -> Option<bool> {
        let half = self.half_total();
        if half > 1_000_000 {
            return None;
        }
        let mut reachable = vec![false; half as usize + 1];
        reachable[0] = true;
        for &y in &self.values {
            let y = y as usize;
            for s in (y..reachable.len()).rev() {
                if reachable[s - y] {
                    reachable[s] = true;
                }
            }
        }
        Some(reachable[half as usize])
    }
}

/// How a generated instance's optimal cost decides the source problem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum VerdictRule {
    /// Yes iff the optimal cost is at most this threshold.
    CostAtMost(f64),
    /// Yes iff the optimal cost equals this value.
    CostExactly(f64),
}

/// Decision recipe attached to a generated hardness instance.
#[derive(Debug, Clone, PartialEq)]
pub struct Certificate {
    pub rule: VerdictRule,
    /// Exhaustively computed answer of the source problem, when small
    /// enough to compute.
    pub expected: Option<bool>,
}

impl Certificate {
    /// Applies the threshold rule to a solved optimum (`None` = infeasible,
    /// which always decides "no").
    pub fn verdict(&self, optimal: Option<f64>, tolerance: f64) -> bool {
        let Some(opt) = optimal else { return false };
        match self.rule {
            VerdictRule::CostAtMost(c) => opt <= c + tolerance,
            VerdictRule::CostExactly(c) => (opt - c).abs() <= tolerance,
        }
    }
}

/// A generated grid together with its decision certificate.
#[derive(Debug, Clone, PartialEq)]
pub struct Reduction {
    pub grid: GridSpec,
    pub certificate: Certificate,
}

/// Builds the canonical two-row lot-sizing grid: one source carrying the
/// whole horizon's demand, per-period production on the downward arcs,
/// per-period holding on the bottom row's forward arcs.
///
/// `production` must give one cost per period, `holding` one per
/// consecutive period pair.
pub fn lot_sizing_grid(
    demands: &[i64],
    production: &[CostSpec],
    holding: &[CostSpec],
) -> Result<GridSpec> {
    let periods = demands.len();
    if production.len() != periods || (periods > 0 && holding.len() != periods - 1) {
        return Err(Error::Parse(format!(
            "lot sizing over {periods} period(s) needs {periods} production cost(s) and {} \
             holding cost(s), got {} and {}",
            periods.saturating_sub(1),
            production.len(),
            holding.len()
        )));
    }
    if let Some(&d) = demands.iter().find(|&&d| d < 0) {
        return Err(Error::NonPositiveInput {
            what: "demand",
            value: d,
        });
    }
    let total: i64 = demands.iter().sum();
    let mut top = vec![0i64; periods];
    if periods > 0 {
        top[0] = total;
    }
    let bottom: Vec<i64> = demands.iter().map(|&d| -d).collect();
    let mut b = GridSpec::builder(2, periods).supplies(vec![top, bottom]);
    for (t, cost) in production.iter().enumerate() {
        b = b.cost(ArcId::Down(Vertex::new(0, t)), cost.clone());
    }
    for (t, cost) in holding.iter().enumerate() {
        b = b.cost(ArcId::Forward(Vertex::new(1, t)), cost.clone());
    }
    b.build()
}

/// Thin multi-echelon layer: a single source in the top-left corner, sinks
/// wherever the caller puts demand, costs wherever the caller puts them.
pub fn echelon_grid(
    rows: usize,
    cols: usize,
    demands: &[(Vertex, i64)],
    costs: &[(ArcId, CostSpec)],
) -> Result<GridSpec> {
    let mut supplies = vec![vec![0i64; cols.max(1)]; rows.max(1)];
    let mut total = 0i64;
    for &(v, d) in demands {
        if d <= 0 {
            return Err(Error::NonPositiveInput {
                what: "demand",
                value: d,
            });
        }
        if v.row >= rows || v.col >= cols || (v.row, v.col) == (0, 0) {
            return Err(Error::SupplyShape { rows, cols });
        }
        supplies[v.row][v.col] -= d;
        total += d;
    }
    supplies[0][0] += total;
    let mut b = GridSpec::builder(rows, cols).supplies(supplies);
    for (arc, cost) in costs {
        b = b.cost(*arc, cost.clone());
    }
    b.build()
}

/// Fixed charge making an arc useless in any optimal solution of the
/// surrounding gadget, which never needs to pay more than `honest_total`.
fn prohibitive(honest_total: i64) -> CostSpec {
    CostSpec::fixed_charge((honest_total + 1) as f64, 0.0)
}

/// Knapsack gadget on a 3-row, `n`-column grid with every downward arc
/// capacity `bound`: column `i`'s middle vertex demands `bound - y_i`, so
/// at most `y_i` units can slip through to the bottom row, paying the fixed
/// charge `c_i` once. The bottom sink demands `target`, hence the optimum
/// is the cheapest item subset covering the target — at most `budget` iff
/// the knapsack answer is yes.
pub fn knapsack_two_sink_rows(kp: &KnapsackInstance, bound: i64) -> Result<Reduction> {
    let max_item = *kp.values.iter().max().expect("nonempty by construction");
    if bound < max_item {
        return Err(Error::BoundBelowMaxItem { bound, max_item });
    }
    let n = kp.len();
    let slack: i64 = kp.values.iter().map(|&y| bound - y).sum();
    let mut top = vec![0i64; n];
    top[0] = slack + kp.target;
    let middle: Vec<i64> = kp.values.iter().map(|&y| -(bound - y)).collect();
    let mut bottom = vec![0i64; n];
    bottom[n - 1] = -kp.target;

    let big_m: i64 = kp.costs.iter().sum::<i64>() + kp.budget;
    let mut b = GridSpec::builder(3, n).supplies(vec![top, middle, bottom]);
    for t in 0..n {
        b = b.capacity(ArcId::Down(Vertex::new(0, t)), bound);
        b = b.capacity(ArcId::Down(Vertex::new(1, t)), bound);
        b = b.cost(
            ArcId::Down(Vertex::new(1, t)),
            CostSpec::fixed_charge(kp.costs[t] as f64, 0.0),
        );
    }
    for t in 0..n.saturating_sub(1) {
        b = b.cost(ArcId::Forward(Vertex::new(1, t)), prohibitive(big_m));
    }
    Ok(Reduction {
        grid: b.build()?,
        certificate: Certificate {
            rule: VerdictRule::CostAtMost(kp.budget as f64),
            expected: kp.exhaustive_verdict(),
        },
    })
}

/// Knapsack gadget on a 3-row, `2n`-column uncapacitated-except-gadgets
/// grid: all flow from the top-left source to the bottom-right sink must
/// traverse one of the middle-row gadget arcs, arc `i` carrying at most
/// `y_i` for a one-off charge of `c_i`.
pub fn knapsack_forward_caps(kp: &KnapsackInstance) -> Result<Reduction> {
    let n = kp.len();
    let cols = 2 * n;
    let mut top = vec![0i64; cols];
    top[0] = kp.target;
    let mut bottom = vec![0i64; cols];
    bottom[cols - 1] = -kp.target;

    let big_m: i64 = kp.costs.iter().sum::<i64>() + kp.budget;
    let mut b = GridSpec::builder(3, cols).supplies(vec![top, vec![0; cols], bottom]);
    for i in 0..n {
        let gadget = ArcId::Forward(Vertex::new(1, 2 * i));
        b = b.capacity(gadget, kp.values[i]);
        b = b.cost(gadget, CostSpec::fixed_charge(kp.costs[i] as f64, 0.0));
    }
    for t in 0..cols {
        // Row-two entry only at odd columns (1-based), exit only at even.
        if t % 2 == 1 {
            b = b.cost(ArcId::Down(Vertex::new(0, t)), prohibitive(big_m));
        } else {
            b = b.cost(ArcId::Down(Vertex::new(1, t)), prohibitive(big_m));
        }
    }
    for t in (1..cols - 1).step_by(2) {
        b = b.cost(ArcId::Forward(Vertex::new(1, t)), prohibitive(big_m));
    }
    Ok(Reduction {
        grid: b.build()?,
        certificate: Certificate {
            rule: VerdictRule::CostAtMost(kp.budget as f64),
            expected: kp.exhaustive_verdict(),
        },
    })
}

/// Partition gadget on an `(n+1) x (n+1)` uncapacitated grid: two equal
/// sources in the top row, one sink per value on the diagonal, and a unit
/// fixed charge on each sink's two entry arcs. Each sink reached from the
/// left traces back to the first source, each reached from above to the
/// second, so a cost of exactly `n` certifies an equal split.
pub fn partition_staircase(pp: &PartitionInstance) -> Result<Reduction> {
    let n = pp.len();
    let side = n + 1;
    let mut supplies = vec![vec![0i64; side]; side];
    supplies[0][0] = pp.half_total();
    supplies[0][1] = pp.half_total();
    for (i, &y) in pp.values.iter().enumerate() {
        supplies[i + 1][i + 1] = -y;
    }

    let big_m = n as i64;
    let unit = CostSpec::fixed_charge(1.0, 0.0);
    let mut b = GridSpec::builder(side, side).supplies(supplies);
    b = b.cost(ArcId::Forward(Vertex::new(0, 0)), prohibitive(big_m));
    for i in 1..=n {
        b = b.cost(ArcId::Forward(Vertex::new(i, i - 1)), unit.clone());
        b = b.cost(ArcId::Down(Vertex::new(i - 1, i)), unit.clone());
        if i < n {
            // No flow may pass through a sink.
            b = b.cost(ArcId::Forward(Vertex::new(i, i)), prohibitive(big_m));
            b = b.cost(ArcId::Down(Vertex::new(i, i)), prohibitive(big_m));
        }
    }
    Ok(Reduction {
        grid: b.build()?,
        certificate: Certificate {
            rule: VerdictRule::CostExactly(n as f64),
            expected: pp.exhaustive_verdict(),
        },
    })
}

/// Partition gadget on a 3-row, `2n`-column uncapacitated grid with
/// terminals in every row: a large buffer source beside each sink lets the
/// sink be fed laterally, while the top-row source can feed it from above;
/// both entries pay a unit fixed charge, so again cost `n` certifies an
/// equal split.
pub fn partition_paired_columns(pp: &PartitionInstance) -> Result<Reduction> {
    let n = pp.len();
    let cols = 2 * n;
    let buffer = 2 * pp.values.iter().sum::<i64>();
    let mut supplies = vec![vec![0i64; cols]; 3];
    supplies[0][0] = pp.half_total();
    for (i, &y) in pp.values.iter().enumerate() {
        supplies[1][2 * i] = buffer;
        supplies[1][2 * i + 1] = -y;
    }
    supplies[2][cols - 1] = -(n as i64 * buffer - pp.half_total());

    let big_m = n as i64;
    let unit = CostSpec::fixed_charge(1.0, 0.0);
    let mut b = GridSpec::builder(3, cols).supplies(supplies);
    for i in 0..n {
        let odd = 2 * i; // buffer-source column
        let even = 2 * i + 1; // sink column
        b = b.cost(ArcId::Forward(Vertex::new(1, odd)), unit.clone());
        b = b.cost(ArcId::Down(Vertex::new(0, even)), unit.clone());
        b = b.cost(ArcId::Down(Vertex::new(0, odd)), prohibitive(big_m));
        b = b.cost(ArcId::Down(Vertex::new(1, even)), prohibitive(big_m));
        if even < cols - 1 {
            b = b.cost(ArcId::Forward(Vertex::new(1, even)), prohibitive(big_m));
        }
    }
    Ok(Reduction {
        grid: b.build()?,
        certificate: Certificate {
            rule: VerdictRule::CostExactly(n as f64),
            expected: pp.exhaustive_verdict(),
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::extreme::enumerate_extreme_points;
    use crate::grid::evaluate_cost;
    use crate::solver::solve;

    fn oracle_optimum(grid: &GridSpec) -> Option<f64> {
        let points = enumerate_extreme_points(grid).unwrap();
        points
            .iter()
            .map(|p| evaluate_cost(grid, p).unwrap())
            .fold(None, |best, c| match best {
                Some(b) if b <= c => Some(b),
                _ => Some(c),
            })
    }

    #[test]
    fn two_period_lot_sizing_consolidates_production() {
        let grid = lot_sizing_grid(
            &[2, 3],
            &[CostSpec::fixed_charge(5.0, 0.0), CostSpec::fixed_charge(5.0, 0.0)],
            &[CostSpec::linear(1.0)],
        )
        .unwrap();
        let sol = solve(&grid).unwrap();
        assert!((sol.cost - 8.0).abs() < 1e-9);
    }

    #[test]
    fn zero_demand_lot_sizing_costs_nothing() {
        let grid = lot_sizing_grid(
            &[0, 0],
            &[CostSpec::fixed_charge(5.0, 0.0), CostSpec::fixed_charge(5.0, 0.0)],
            &[CostSpec::linear(1.0)],
        )
        .unwrap();
        let sol = solve(&grid).unwrap();
        assert_eq!(sol.cost, 0.0);
        assert!(sol.flow.iter().all(|(_, x)| x == 0));
    }

    #[test]
    fn single_period_lot_sizing_is_forced() {
        let grid = lot_sizing_grid(&[4], &[CostSpec::fixed_charge(5.0, 0.25)], &[]).unwrap();
        let sol = solve(&grid).unwrap();
        assert!((sol.cost - 6.0).abs() < 1e-9);
        assert_eq!(sol.flow.get(ArcId::Down(Vertex::new(0, 0))), 4);
    }

    #[test]
    fn lot_sizing_validates_shapes_and_signs() {
        assert!(matches!(
            lot_sizing_grid(&[1, 2], &[CostSpec::Zero], &[]).unwrap_err(),
            Error::Parse(_)
        ));
        assert!(matches!(
            lot_sizing_grid(&[1, -2], &[CostSpec::Zero, CostSpec::Zero], &[CostSpec::Zero])
                .unwrap_err(),
            Error::NonPositiveInput { .. }
        ));
    }

    #[test]
    fn echelon_layer_places_demands_and_costs() {
        let grid = echelon_grid(
            3,
            2,
            &[(Vertex::new(2, 1), 2), (Vertex::new(1, 0), 1)],
            &[(ArcId::Down(Vertex::new(0, 0)), CostSpec::linear(1.0))],
        )
        .unwrap();
        assert_eq!(grid.supply(Vertex::new(0, 0)), 3);
        assert_eq!(grid.supply(Vertex::new(2, 1)), -2);
        // Only the unit of demand at (1,0) must cross the priced arc; the
        // rest routes around it for free.
        let sol = solve(&grid).unwrap();
        assert!((sol.cost - 1.0).abs() < 1e-9);
        assert!(matches!(
            echelon_grid(2, 2, &[(Vertex::new(0, 0), 1)], &[]).unwrap_err(),
            Error::SupplyShape { .. }
        ));
    }

    #[test]
    fn knapsack_sink_rows_yes_and_no_instances() {
        let kp = KnapsackInstance::new(vec![3, 4], vec![2, 3], 3, 4).unwrap();
        let reduction = knapsack_two_sink_rows(&kp, 4).unwrap();
        assert_eq!(reduction.certificate.expected, Some(true));
        let opt = oracle_optimum(&reduction.grid).unwrap();
        assert!((opt - 3.0).abs() < 1e-9);
        assert!(reduction.certificate.verdict(Some(opt), 1e-9));
        assert!(opt < 9.0, "prohibitive arcs must stay unused");

        let tight = KnapsackInstance::new(vec![3, 4], vec![2, 3], 1, 4).unwrap();
        let no = knapsack_two_sink_rows(&tight, 4).unwrap();
        assert_eq!(no.certificate.expected, Some(false));
        let opt = oracle_optimum(&no.grid).unwrap();
        assert!(opt > 1.0 + 1e-9);
        assert!(!no.certificate.verdict(Some(opt), 1e-9));
    }

    #[test]
    fn single_item_knapsack_sink_rows_is_forced() {
        let kp = KnapsackInstance::new(vec![2], vec![1], 1, 2).unwrap();
        let reduction = knapsack_two_sink_rows(&kp, 2).unwrap();
        let opt = oracle_optimum(&reduction.grid).unwrap();
        assert!((opt - 1.0).abs() < 1e-9);
        assert!(reduction.certificate.verdict(Some(opt), 1e-9));
    }

    #[test]
    fn sink_rows_bound_must_cover_the_largest_item() {
        let kp = KnapsackInstance::new(vec![3, 4], vec![2, 3], 3, 4).unwrap();
        assert!(matches!(
            knapsack_two_sink_rows(&kp, 3).unwrap_err(),
            Error::BoundBelowMaxItem {
                bound: 3,
                max_item: 4
            }
        ));
    }

    #[test]
    fn knapsack_forward_caps_yes_no_and_extremes() {
        let kp = KnapsackInstance::new(vec![3, 4], vec![2, 3], 3, 4).unwrap();
        let reduction = knapsack_forward_caps(&kp).unwrap();
        assert_eq!(reduction.certificate.expected, Some(true));
        let opt = oracle_optimum(&reduction.grid).unwrap();
        assert!((opt - 3.0).abs() < 1e-9);

        let all = KnapsackInstance::new(vec![3, 4], vec![2, 3], 5, 7).unwrap();
        let opt = oracle_optimum(&knapsack_forward_caps(&all).unwrap().grid).unwrap();
        assert!((opt - 5.0).abs() < 1e-9, "full target opens every gadget");

        let nothing = KnapsackInstance::new(vec![3, 4], vec![2, 3], 0, 0).unwrap();
        let opt = oracle_optimum(&knapsack_forward_caps(&nothing).unwrap().grid).unwrap();
        assert_eq!(opt, 0.0);
    }

    #[test]
    fn partition_staircase_decides_equal_splits() {
        let yes = partition_staircase(&PartitionInstance::new(vec![1, 1]).unwrap()).unwrap();
        assert_eq!(yes.certificate.expected, Some(true));
        let opt = oracle_optimum(&yes.grid).unwrap();
        assert!((opt - 2.0).abs() < 1e-9);
        assert!(yes.certificate.verdict(Some(opt), 1e-9));

        let no = partition_staircase(&PartitionInstance::new(vec![1, 1, 4]).unwrap()).unwrap();
        assert_eq!(no.certificate.expected, Some(false));
        let opt = oracle_optimum(&no.grid).unwrap();
        assert!(opt > 3.0 + 1e-9);
        assert!(!no.certificate.verdict(Some(opt), 1e-9));
    }

    #[test]
    fn odd_totals_are_rejected_up_front() {
        assert!(matches!(
            PartitionInstance::new(vec![2, 2, 1]).unwrap_err(),
            Error::OddTotal(5)
        ));
    }

    #[test]
    fn partition_paired_columns_decides_equal_splits() {
        let yes = partition_paired_columns(&PartitionInstance::new(vec![1, 1]).unwrap()).unwrap();
        assert_eq!(yes.certificate.expected, Some(true));
        let opt = oracle_optimum(&yes.grid).unwrap();
        assert!((opt - 2.0).abs() < 1e-9);

        let no = partition_paired_columns(&PartitionInstance::new(vec![1, 3]).unwrap()).unwrap();
        assert_eq!(no.certificate.expected, Some(false));
        let opt = oracle_optimum(&no.grid).unwrap();
        assert!(opt > 2.0 + 1e-9);
        assert!(!no.certificate.verdict(Some(opt), 1e-9));
    }

    #[test]
    fn generated_grids_balance_by_construction() {
        let kp = KnapsackInstance::new(vec![2, 3, 1], vec![1, 2, 2], 3, 4).unwrap();
        let pp = PartitionInstance::new(vec![2, 3, 5]).unwrap();
        for grid in [
            knapsack_two_sink_rows(&kp, 3).unwrap().grid,
            knapsack_forward_caps(&kp).unwrap().grid,
            partition_staircase(&pp).unwrap().grid,
            partition_paired_columns(&pp).unwrap().grid,
        ] {
            let total: i64 = grid.vertices().map(|v| grid.supply(v)).sum();
            assert_eq!(total, 0);
        }
    }

    #[test]
    fn exhaustive_baselines_agree_with_hand_answers() {
        let kp = KnapsackInstance::new(vec![3, 4], vec![2, 3], 3, 4).unwrap();
        assert_eq!(kp.exhaustive_verdict(), Some(true));
        let kp = KnapsackInstance::new(vec![3, 4], vec![2, 3], 4, 7).unwrap();
        assert_eq!(kp.exhaustive_verdict(), Some(false));
        let pp = PartitionInstance::new(vec![3, 1, 2]).unwrap();
        assert_eq!(pp.exhaustive_verdict(), Some(true));
        let pp = PartitionInstance::new(vec![1, 1, 4]).unwrap();
        assert_eq!(pp.exhaustive_verdict(), Some(false));
    }
}
