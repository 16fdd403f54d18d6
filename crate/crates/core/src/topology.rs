//! AS-level Internet graph with provider/customer and peer relationships.
//!
//! Topologies are edge-defined: they are built from a CAIDA serial-2
//! relationship stream (`<as1>|<as2>|<rel>[|<source>]`, `rel` -1 for
//! provider-to-customer and 0 for peer) or from explicit edge lists, and are
//! immutable after construction so they can be shared read-only across
//! concurrent simulation runs.

use std::collections::HashMap;
use std::fmt;
use std::io::BufRead;

use thiserror::Error;

use crate::addr::AsNumber;

pub mod synth;

/// Business relationship between two ASes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Relation {
    /// First AS is a provider of the second (serial-2 `-1`).
    ProviderCustomer,
    /// Settlement-free peers (serial-2 `0`).
    Peer,
}

/// One relationship edge. For `ProviderCustomer`, `a` is the provider of `b`;
/// for `Peer` the order of `a` and `b` carries no meaning.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RelEdge {
    pub a: AsNumber,
    pub b: AsNumber,
    pub rel: Relation,
}

impl RelEdge {
    pub fn provider_customer(provider: AsNumber, customer: AsNumber) -> Self {
        RelEdge { a: provider, b: customer, rel: Relation::ProviderCustomer }
    }

    pub fn peer(a: AsNumber, b: AsNumber) -> Self {
        RelEdge { a, b, rel: Relation::Peer }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TopologyError {
    #[error("line {line}: malformed relationship record: {reason}")]
    Malformed { line: usize, reason: String },
    #[error("conflicting relationship for AS pair {a}-{b}")]
    ConflictingDuplicate { a: AsNumber, b: AsNumber },
    #[error("self-loop on AS {0}")]
    SelfLoop(AsNumber),
    #[error("I/O error reading relationships: {0}")]
    Io(String),
}

/// Immutable AS-level topology.
///
/// Nodes are indexed densely (sorted by ASN) for the simulator; the public
/// surface speaks [`AsNumber`]. Every adjacency list is sorted so iteration
/// order, and therefore every downstream computation, is deterministic.
#[derive(Debug, Clone)]
pub struct Topology {
    asns: Vec<u32>,
    index: HashMap<u32, u32>,
    providers: Vec<Vec<u32>>,
    customers: Vec<Vec<u32>>,
    peers: Vec<Vec<u32>>,
    provider_edge_count: usize,
    peer_edge_count: usize,
}

impl Topology {
    /// Build a topology from an explicit edge list.
    pub fn from_edges(edges: &[RelEdge]) -> Result<Self, TopologyError> {
        let mut builder = Builder::default();
        for e in edges {
            builder.add(*e)?;
        }
        Ok(builder.finish())
    }

    /// Parse a CAIDA serial-2 relationship stream. Lines starting with `#`
    /// are comments; exact duplicate records are tolerated.
    pub fn parse_relationships<R: BufRead>(reader: R) -> Result<Self, TopologyError> {
        let mut builder = Builder::default();
        for (i, line) in reader.lines().enumerate() {
            let line = line.map_err(|e| TopologyError::Io(e.to_string()))?;
            let line_no = i + 1;
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let edge = parse_line(trimmed, line_no)?;
            builder.add(edge)?;
        }
        Ok(builder.finish())
    }

    /// Union of this topology and `extra`. New ASNs are added; duplicates of
    /// existing edges are ignored; conflicting relationships are an error.
    pub fn augment_edges(&self, extra: &[RelEdge]) -> Result<Self, TopologyError> {
        let mut builder = Builder::default();
        for e in self.edges() {
            builder.add(e)?;
        }
        for e in extra {
            builder.add(*e)?;
        }
        Ok(builder.finish())
    }

    /// Number of distinct ASNs.
    pub fn node_count(&self) -> usize {
        self.asns.len()
    }

    pub fn provider_edge_count(&self) -> usize {
        self.provider_edge_count
    }

    pub fn peer_edge_count(&self) -> usize {
        self.peer_edge_count
    }

    pub fn contains(&self, asn: AsNumber) -> bool {
        self.index.contains_key(&asn.get())
    }

    /// ASNs in ascending order.
    pub fn asns(&self) -> impl Iterator<Item = AsNumber> + '_ {
        self.asns.iter().map(|&v| AsNumber::new(v).unwrap())
    }

    /// Canonical edge list: provider edges as written, peer edges with the
    /// lower ASN first, sorted.
    pub fn edges(&self) -> Vec<RelEdge> {
        let mut out = Vec::with_capacity(self.provider_edge_count + self.peer_edge_count);
        for (i, customers) in self.customers.iter().enumerate() {
            for &c in customers {
                out.push(RelEdge::provider_customer(self.asn_of(i as u32), self.asn_of(c)));
            }
        }
        for (i, peers) in self.peers.iter().enumerate() {
            for &p in peers {
                if (i as u32) < p {
                    out.push(RelEdge::peer(self.asn_of(i as u32), self.asn_of(p)));
                }
            }
        }
        out.sort_by_key(|e| (e.a, e.b, e.rel == Relation::Peer));
        out
    }

    /// Serialize to the serial-2 text format, canonically ordered such that
    /// `parse_relationships(serialize(t))` reproduces `t` exactly.
    pub fn serialize(&self) -> String {
        let mut out = String::new();
        for e in self.edges() {
            let rel = match e.rel {
                Relation::ProviderCustomer => -1,
                Relation::Peer => 0,
            };
            out.push_str(&format!("{}|{}|{}\n", e.a, e.b, rel));
        }
        out
    }

    // Dense-index accessors used by the simulator.

    pub(crate) fn id_of(&self, asn: AsNumber) -> Option<u32> {
        self.index.get(&asn.get()).copied()
    }

    pub(crate) fn asn_of(&self, id: u32) -> AsNumber {
        AsNumber::new(self.asns[id as usize]).unwrap()
    }

    pub(crate) fn providers_of(&self, id: u32) -> &[u32] {
        &self.providers[id as usize]
    }

    pub(crate) fn customers_of(&self, id: u32) -> &[u32] {
        &self.customers[id as usize]
    }

    pub(crate) fn peers_of(&self, id: u32) -> &[u32] {
        &self.peers[id as usize]
    }

    /// Relationship of `a` toward `b`, if they are adjacent.
    pub fn relation(&self, a: AsNumber, b: AsNumber) -> Option<Neighbor> {
        let (ia, ib) = (self.id_of(a)?, self.id_of(b)?);
        if self.customers[ia as usize].binary_search(&ib).is_ok() {
            Some(Neighbor::Customer)
        } else if self.providers[ia as usize].binary_search(&ib).is_ok() {
            Some(Neighbor::Provider)
        } else if self.peers[ia as usize].binary_search(&ib).is_ok() {
            Some(Neighbor::Peer)
        } else {
            None
        }
    }
}

/// How a neighbor relates to an AS, from that AS's point of view.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Neighbor {
    Customer,
    Peer,
    Provider,
}

impl fmt::Display for Topology {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} ASes, {} provider edges, {} peer edges",
            self.node_count(),
            self.provider_edge_count,
            self.peer_edge_count
        )
    }
}

fn parse_line(line: &str, line_no: usize) -> Result<RelEdge, TopologyError> {
    let fields: Vec<&str> = line.split('|').collect();
    // Trailing `source` field is provenance we do not use.
    if fields.len() != 3 && fields.len() != 4 {
        return Err(TopologyError::Malformed {
            line: line_no,
            reason: format!("expected 3 or 4 fields, got {}", fields.len()),
        });
    }
    let a: AsNumber = fields[0].parse().map_err(|e| TopologyError::Malformed {
        line: line_no,
        reason: format!("{e}"),
    })?;
    let b: AsNumber = fields[1].parse().map_err(|e| TopologyError::Malformed {
        line: line_no,
        reason: format!("{e}"),
    })?;
    let rel = match fields[2] {
        "-1" => Relation::ProviderCustomer,
        "0" => Relation::Peer,
        other => {
            return Err(TopologyError::Malformed {
                line: line_no,
                reason: format!("relationship must be -1 or 0, got `{other}`"),
            })
        }
    };
    Ok(RelEdge { a, b, rel })
}

#[derive(Default)]
struct Builder {
    // (min asn, max asn) -> relationship as seen from the min-ASN side
    seen: HashMap<(u32, u32), SeenRel>,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum SeenRel {
    LowIsProvider,
    HighIsProvider,
    Peer,
}

impl Builder {
    fn add(&mut self, edge: RelEdge) -> Result<(), TopologyError> {
        if edge.a == edge.b {
            return Err(TopologyError::SelfLoop(edge.a));
        }
        let (lo, hi) = if edge.a < edge.b {
            (edge.a.get(), edge.b.get())
        } else {
            (edge.b.get(), edge.a.get())
        };
        let rel = match edge.rel {
            Relation::Peer => SeenRel::Peer,
            Relation::ProviderCustomer if edge.a.get() == lo => SeenRel::LowIsProvider,
            Relation::ProviderCustomer => SeenRel::HighIsProvider,
        };
        match self.seen.insert((lo, hi), rel) {
            Some(prev) if prev != rel => Err(TopologyError::ConflictingDuplicate {
                a: edge.a,
                b: edge.b,
            }),
            _ => Ok(()),
        }
    }

    fn finish(self) -> Topology {
        let mut asns: Vec<u32> = self
            .seen
            .keys()
            .flat_map(|&(a, b)| [a, b])
            .collect();
        asns.sort_unstable();
        asns.dedup();
        let index: HashMap<u32, u32> = asns
            .iter()
            .enumerate()
            .map(|(i, &a)| (a, i as u32))
            .collect();

        let n = asns.len();
        let mut providers = vec![Vec::new(); n];
        let mut customers = vec![Vec::new(); n];
        let mut peers = vec![Vec::new(); n];
        let mut provider_edge_count = 0;
        let mut peer_edge_count = 0;

        for (&(lo, hi), &rel) in &self.seen {
            let (il, ih) = (index[&lo], index[&hi]);
            match rel {
                SeenRel::Peer => {
                    peers[il as usize].push(ih);
                    peers[ih as usize].push(il);
                    peer_edge_count += 1;
                }
                SeenRel::LowIsProvider => {
                    customers[il as usize].push(ih);
                    providers[ih as usize].push(il);
                    provider_edge_count += 1;
                }
                SeenRel::HighIsProvider => {
                    customers[ih as usize].push(il);
                    providers[il as usize].push(ih);
                    provider_edge_count += 1;
                }
            }
        }
        for list in providers.iter_mut().chain(&mut customers).chain(&mut peers) {
            list.sort_unstable();
        }

        Topology {
            asns,
            index,
            providers,
            customers,
            peers,
            provider_edge_count,
            peer_edge_count,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Cursor;

    fn asn(v: u32) -> AsNumber {
        AsNumber::new(v).unwrap()
    }

    fn parse(text: &str) -> Result<Topology, TopologyError> {
        Topology::parse_relationships(Cursor::new(text))
    }

    #[test]
    fn parses_provider_edge() {
        let t = parse("1|2|-1").unwrap();
        assert_eq!(t.node_count(), 2);
        assert_eq!(t.relation(asn(1), asn(2)), Some(Neighbor::Customer));
        assert_eq!(t.relation(asn(2), asn(1)), Some(Neighbor::Provider));
    }

    #[test]
    fn skips_comments_and_blank_lines() {
        let t = parse("# comment\n\n1|2|0\n").unwrap();
        assert_eq!(t.node_count(), 2);
        assert_eq!(t.relation(asn(1), asn(2)), Some(Neighbor::Peer));
        assert_eq!(t.relation(asn(2), asn(1)), Some(Neighbor::Peer));
    }

    #[test]
    fn ignores_source_field() {
        let t = parse("1|2|-1|bgp").unwrap();
        assert_eq!(t.provider_edge_count(), 1);
    }

    #[test]
    fn rejects_conflicting_duplicate() {
        assert!(matches!(
            parse("1|2|-1\n1|2|0"),
            Err(TopologyError::ConflictingDuplicate { .. })
        ));
        // Reversed provider direction also conflicts.
        assert!(matches!(
            parse("1|2|-1\n2|1|-1"),
            Err(TopologyError::ConflictingDuplicate { .. })
        ));
        // Exact duplicate is fine.
        assert_eq!(parse("1|2|-1\n1|2|-1").unwrap().provider_edge_count(), 1);
    }

    #[test]
    fn rejects_malformed_lines() {
        for bad in ["1|2", "1|2|-1|x|y", "x|2|-1", "1|2|7", "0|2|-1", "1|1|0"] {
            assert!(parse(bad).is_err(), "expected error for {bad:?}");
        }
    }

    #[test]
    fn augment_unions_and_conflicts() {
        let t = parse("1|2|-1").unwrap();
        let t2 = t
            .augment_edges(&[RelEdge::peer(asn(2), asn(3))])
            .unwrap();
        assert_eq!(t2.node_count(), 3);
        assert_eq!(t2.relation(asn(2), asn(3)), Some(Neighbor::Peer));
        assert_eq!(t2.relation(asn(1), asn(2)), Some(Neighbor::Customer));

        let same = t.augment_edges(&[]).unwrap();
        assert_eq!(same.serialize(), t.serialize());

        assert!(matches!(
            t.augment_edges(&[RelEdge::peer(asn(1), asn(2))]),
            Err(TopologyError::ConflictingDuplicate { .. })
        ));
    }

    #[test]
    fn serialize_parse_roundtrip() {
        let t = parse("7|3|-1\n3|9|0\n1|7|-1\n# c\n5|7|0").unwrap();
        let round = parse(&t.serialize()).unwrap();
        assert_eq!(round.serialize(), t.serialize());
        assert_eq!(round.node_count(), t.node_count());
    }
}
