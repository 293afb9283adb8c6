//! Genome persistence: a small versioned JSON schema.
//!
//! The on-disk form is decoupled from the in-memory [`Genome`] so the format
//! can stay stable across refactors. Weights survive a round trip bit-exactly
//! (shortest-representation float printing parses back to the same bits).
//! Files record the noise mode so a stored decoder knows its own arity, and
//! optionally the id of the run that produced them.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::genome::{ConnectionGene, Genome, NodeGene, NodeKind};
use crate::perspective::NoiseKind;
use crate::scalar::Scalar;
use crate::Result;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NodeEntry<F> {
    id: u32,
    kind: NodeKind,
    bias: F,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConnectionEntry<F> {
    innovation: u32,
    #[serde(rename = "in")]
    in_node: u32,
    #[serde(rename = "out")]
    out_node: u32,
    weight: F,
    enabled: bool,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GenomeFile<F> {
    format_version: u32,
    mode: NoiseKind,
    n_in: usize,
    n_out: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    run_id: Option<String>,
    nodes: Vec<NodeEntry<F>>,
    connections: Vec<ConnectionEntry<F>>,
}

/// Serialize a genome; the result always ends with a newline.
pub fn to_json<F: Scalar>(genome: &Genome<F>, mode: NoiseKind, run_id: Option<&str>) -> String {
    let file = GenomeFile {
        format_version: FORMAT_VERSION,
        mode,
        n_in: genome.n_in(),
        n_out: genome.n_out(),
        run_id: run_id.map(str::to_owned),
        nodes: genome
            .nodes()
            .iter()
            .map(|n| NodeEntry {
                id: n.id,
                kind: n.kind,
                bias: n.bias,
            })
            .collect(),
        connections: genome
            .connections()
            .iter()
            .map(|c| ConnectionEntry {
                innovation: c.innovation,
                in_node: c.in_node,
                out_node: c.out_node,
                weight: c.weight,
                enabled: c.enabled,
            })
            .collect(),
    };
    let mut s = serde_json::to_string_pretty(&file).expect("genome serialization is infallible");
    s.push('\n');
    s
}

/// Parse and fully validate a genome file.
pub fn from_json<F: Scalar>(text: &str) -> Result<(Genome<F>, NoiseKind, Option<String>)> {
    let file: GenomeFile<F> =
        serde_json::from_str(text).map_err(|e| Error::GenomeFile(e.to_string()))?;
    if file.format_version != FORMAT_VERSION {
        return Err(Error::GenomeFile(format!(
            "unsupported format_version {} (this build reads {})",
            file.format_version, FORMAT_VERSION
        )));
    }
    let nodes: Vec<NodeGene<F>> = file
        .nodes
        .into_iter()
        .map(|n| NodeGene {
            id: n.id,
            kind: n.kind,
            bias: n.bias,
        })
        .collect();
    let connections: Vec<ConnectionGene<F>> = file
        .connections
        .into_iter()
        .map(|c| ConnectionGene {
            innovation: c.innovation,
            in_node: c.in_node,
            out_node: c.out_node,
            weight: c.weight,
            enabled: c.enabled,
        })
        .collect();
    let genome = Genome::from_parts(file.n_in, file.n_out, nodes, connections)?;
    if file.mode.d_for_inputs(genome.n_in()).is_none() || genome.n_out() != file.mode.n_actions() {
        return Err(Error::ArityModeMismatch {
            n_in: genome.n_in(),
            n_out: genome.n_out(),
            mode: file.mode.name(),
        });
    }
    Ok((genome, file.mode, file.run_id))
}

pub fn save_genome<F: Scalar>(
    path: &Path,
    genome: &Genome<F>,
    mode: NoiseKind,
    run_id: Option<&str>,
) -> Result<()> {
    fs::write(path, to_json(genome, mode, run_id))?;
    Ok(())
}

pub fn load_genome<F: Scalar>(path: &Path) -> Result<(Genome<F>, NoiseKind, Option<String>)> {
    let text = fs::read_to_string(path)?;
    from_json(&text).map_err(|e| match e {
        Error::GenomeFile(msg) => Error::GenomeFile(format!("{}: {msg}", path.display())),
        other => other,
    })
}
