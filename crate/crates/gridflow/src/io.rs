//! Instance and flow files.
//!
//! Both formats are JSON with 1-based vertex coordinates `[row, column]`.
//! An instance holds the grid dimensions, the supply matrix, and a list of
//! arcs that differ from the defaults (unbounded capacity, zero cost);
//! capacities are integers or the string `"inf"`. A flow file holds the
//! dimensions and the nonzero arc flows. Writers emit arcs in a canonical
//! order with stable key order, so equal inputs produce byte-identical
//! files; integers round-trip exactly, and floating-point cost parameters
//! round-trip through the shortest decimal representation that restores
//! their bits.

use serde::{Deserialize, Serialize};

use crate::cost::CostSpec;
use crate::error::{Error, Result};
use crate::grid::{ArcId, Capacity, FlowAssignment, GridSpec, Vertex};

#[derive(Debug, Serialize, Deserialize)]
struct InstanceFile {
    #[serde(rename = "L")]
    rows: usize,
    #[serde(rename = "T")]
    cols: usize,
    supplies: Vec<Vec<i64>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    arcs: Vec<ArcEntry>,
}

#[derive(Debug, Serialize, Deserialize)]
struct ArcEntry {
    from: [usize; 2],
    to: [usize; 2],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    capacity: Option<CapacityDto>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    cost: Option<CostDto>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(untagged)]
enum CapacityDto {
    Finite(i64),
    Symbol(String),
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
enum CostDto {
    Zero,
    Linear {
        slope: f64,
    },
    FixedCharge {
        setup: f64,
        slope: f64,
    },
    PiecewiseConcave {
        breakpoints: Vec<i64>,
        slopes: Vec<f64>,
    },
    Power {
        coeff: f64,
        exponent: f64,
    },
}

#[derive(Debug, Serialize, Deserialize)]
struct FlowFile {
    #[serde(rename = "L")]
    rows: usize,
    #[serde(rename = "T")]
    cols: usize,
    flows: Vec<FlowEntry>,
}

#[derive(Debug, Serialize, Deserialize)]
struct FlowEntry {
    from: [usize; 2],
    to: [usize; 2],
    flow: i64,
}

fn vertex_dto(v: Vertex) -> [usize; 2] {
    [v.row + 1, v.col + 1]
}

/// Decodes a 1-based `from`/`to` pair into an arc; the head must be the
/// tail's forward or downward neighbor.
fn arc_from_dto(from: [usize; 2], to: [usize; 2]) -> Result<ArcId> {
    let [fr, fc] = from;
    let [tr, tc] = to;
    if fr == 0 || fc == 0 || tr == 0 || tc == 0 {
        return Err(Error::Parse(format!(
            "vertex coordinates are 1-based, got [{fr},{fc}] -> [{tr},{tc}]"
        )));
    }
    let tail = Vertex::new(fr - 1, fc - 1);
    if tr == fr && tc == fc + 1 {
        Ok(ArcId::Forward(tail))
    } else if tr == fr + 1 && tc == fc {
        Ok(ArcId::Down(tail))
    } else {
        Err(Error::Parse(format!(
            "arc [{fr},{fc}] -> [{tr},{tc}] is neither a forward nor a downward step"
        )))
    }
}

fn capacity_from_dto(dto: &CapacityDto) -> Result<Capacity> {
    match dto {
        CapacityDto::Finite(v) => Ok(Capacity::Finite(*v)),
        CapacityDto::Symbol(s) if s == "inf" => Ok(Capacity::Unbounded),
        CapacityDto::Symbol(s) => Err(Error::Parse(format!(
            "capacity must be an integer or \"inf\", got \"{s}\""
        ))),
    }
}

fn cost_from_dto(dto: CostDto) -> CostSpec {
    match dto {
        CostDto::Zero => CostSpec::Zero,
        CostDto::Linear { slope } => CostSpec::Linear { slope },
        CostDto::FixedCharge { setup, slope } => CostSpec::FixedCharge { setup, slope },
        CostDto::PiecewiseConcave {
            breakpoints,
            slopes,
        } => CostSpec::PiecewiseConcave {
            breakpoints,
            slopes,
        },
        CostDto::Power { coeff, exponent } => CostSpec::Power { coeff, exponent },
    }
}

fn cost_to_dto(cost: &CostSpec) -> Result<CostDto> {
    Ok(match cost {
        CostSpec::Zero => CostDto::Zero,
        CostSpec::Linear { slope } => CostDto::Linear { slope: *slope },
        CostSpec::FixedCharge { setup, slope } => CostDto::FixedCharge {
            setup: *setup,
            slope: *slope,
        },
        CostSpec::PiecewiseConcave {
            breakpoints,
            slopes,
        } => CostDto::PiecewiseConcave {
            breakpoints: breakpoints.clone(),
            slopes: slopes.clone(),
        },
        CostSpec::Power { coeff, exponent } => CostDto::Power {
            coeff: *coeff,
            exponent: *exponent,
        },
        CostSpec::Opaque(_) => {
            return Err(Error::Parse(
                "opaque cost closures cannot be written to a file".into(),
            ))
        }
    })
}

/// Parses an instance file and validates it into a [`GridSpec`].
pub fn read_instance(text: &str) -> Result<GridSpec> {
    let file: InstanceFile =
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    let mut b = GridSpec::builder(file.rows, file.cols).supplies(file.supplies);
    for entry in file.arcs {
        let arc = arc_from_dto(entry.from, entry.to)?;
        if let Some(cap) = &entry.capacity {
            b = b.capacity(arc, capacity_from_dto(cap)?);
        }
        if let Some(cost) = entry.cost {
            b = b.cost(arc, cost_from_dto(cost));
        }
    }
    b.build()
}

/// Serializes an instance; arcs appear in canonical order and only when
/// they differ from the defaults. Fails only on unserializable opaque
/// costs.
pub fn write_instance(grid: &GridSpec) -> Result<String> {
    let mut arcs = Vec::new();
    for arc in grid.arcs() {
        let capacity = match grid.capacity(arc) {
            Capacity::Unbounded => None,
            Capacity::Finite(v) => Some(CapacityDto::Finite(v)),
        };
        let cost = match grid.cost(arc) {
            CostSpec::Zero => None,
            other => Some(cost_to_dto(other)?),
        };
        if capacity.is_some() || cost.is_some() {
            arcs.push(ArcEntry {
                from: vertex_dto(arc.tail()),
                to: vertex_dto(arc.head()),
                capacity,
                cost,
            });
        }
    }
    let file = InstanceFile {
        rows: grid.rows(),
        cols: grid.cols(),
        supplies: (0..grid.rows()).map(|l| grid.row_supplies(l).to_vec()).collect(),
        arcs,
    };
    let mut text =
        serde_json::to_string_pretty(&file).map_err(|e| Error::Parse(e.to_string()))?;
    text.push('\n');
    Ok(text)
}

/// Parses a flow file into a dense assignment.
pub fn read_flow(text: &str) -> Result<FlowAssignment> {
    let file: FlowFile = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    if file.rows == 0 || file.cols == 0 {
        return Err(Error::Parse(format!(
            "flow grid dimensions must be positive, got {}x{}",
            file.rows, file.cols
        )));
    }
    let mut flow = FlowAssignment::zeros(file.rows, file.cols);
    for entry in file.flows {
        let arc = arc_from_dto(entry.from, entry.to)?;
        let v = arc.tail();
        let in_bounds = match arc {
            ArcId::Forward(_) => v.row < file.rows && v.col + 1 < file.cols,
            ArcId::Down(_) => v.row + 1 < file.rows && v.col < file.cols,
        };
        if !in_bounds {
            return Err(Error::Parse(format!(
                "arc {arc} lies outside a {}x{} grid",
                file.rows, file.cols
            )));
        }
        flow.set(arc, entry.flow);
    }
    Ok(flow)
}

/// Serializes a flow: dimensions plus the nonzero arcs in canonical order.
pub fn write_flow(flow: &FlowAssignment) -> String {
    let file = FlowFile {
        rows: flow.rows(),
        cols: flow.cols(),
        flows: flow
            .nonzero()
            .map(|(arc, x)| FlowEntry {
                from: vertex_dto(arc.tail()),
                to: vertex_dto(arc.head()),
                flow: x,
            })
            .collect(),
    };
    let mut text = serde_json::to_string_pretty(&file).expect("flow files always serialize");
    text.push('\n');
    text
}
