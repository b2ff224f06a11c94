//! Broadcast for expander graphs: the general-t bundle protocol over a
//! directed sampled family, with the path budget derived from a shared
//! conductance estimate (`L = ceil(c_l * ln n / phi)`).
//!
//! Each node stores and forwards only bundles received over incoming edge
//! directions it sampled into the subgraph, so an adversarial endpoint
//! cannot misrepresent the sampling of its peer.

use super::bbt::{Bbt, BbtParams};
use crate::covering::{build_expander_family, CoveringFamily, FamilyConstants};
use crate::engine::{ChannelMode, Value};
use crate::graph::{Graph, NodeId};
use crate::protocols::{ProtocolConstants, ProtocolError};

#[derive(Clone, Debug)]
pub struct ExpanderParams {
    pub m0: Value,
    pub source: NodeId,
    pub source_active: bool,
    pub t: u32,
    /// Shared linear estimate of the graph conductance.
    pub phi_estimate: f64,
    pub constants: ProtocolConstants,
    pub family_constants: FamilyConstants,
    pub family_seed: u64,
}

/// Builds the directed family and the protocol; the family is returned too
/// so callers can hand its descriptor to the adversary.
pub fn expander_broadcast<'g>(
    g: &'g Graph,
    params: &ExpanderParams,
) -> Result<(Bbt<'g>, CoveringFamily), ProtocolError> {
    if !(params.phi_estimate > 0.0) {
        return Err(ProtocolError::InvalidParam(
            "phi estimate must be positive".into(),
        ));
    }
    let fam = build_expander_family(
        g,
        params.t,
        params.family_seed,
        true,
        &params.family_constants,
    );
    let l = (params.constants.c_l * (g.n().max(2) as f64).ln() / params.phi_estimate).ceil()
        as u32;
    let protocol = Bbt::new(
        g,
        &fam,
        &BbtParams {
            l: l.max(1),
            t: params.t,
            c3: params.constants.c3,
            m0: params.m0,
            source: params.source,
            source_active: params.source_active,
            mode: ChannelMode::Congest,
        },
    )?;
    Ok((protocol, fam))
}
