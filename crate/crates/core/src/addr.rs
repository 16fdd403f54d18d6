//! Addressing primitives: AS numbers and IP prefixes.

use std::fmt;
use std::net::{IpAddr, Ipv4Addr, Ipv6Addr};
use std::num::NonZeroU32;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// An autonomous system number. Zero is not a valid ASN.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AsNumber(NonZeroU32);

impl AsNumber {
    pub fn new(value: u32) -> Option<Self> {
        NonZeroU32::new(value).map(AsNumber)
    }

    pub fn get(self) -> u32 {
        self.0.get()
    }
}

impl fmt::Display for AsNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum AddrError {
    #[error("ASN must be a positive integer, got `{0}`")]
    InvalidAsn(String),
    #[error("prefix length {len} exceeds the {version} maximum of {max}")]
    LengthOutOfRange { version: IpVersion, len: u8, max: u8 },
    #[error("host bits set beyond prefix length /{0}")]
    HostBitsSet(u8),
    #[error("malformed prefix `{0}`, expected address/length")]
    MalformedPrefix(String),
}

impl FromStr for AsNumber {
    type Err = AddrError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.parse::<u32>()
            .ok()
            .and_then(AsNumber::new)
            .ok_or_else(|| AddrError::InvalidAsn(s.to_string()))
    }
}

impl Serialize for AsNumber {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_u32(self.get())
    }
}

impl<'de> Deserialize<'de> for AsNumber {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let v = u32::deserialize(d)?;
        AsNumber::new(v).ok_or_else(|| serde::de::Error::custom("ASN must be positive"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum IpVersion {
    V4,
    V6,
}

impl IpVersion {
    pub fn max_len(self) -> u8 {
        match self {
            IpVersion::V4 => 32,
            IpVersion::V6 => 128,
        }
    }
}

impl fmt::Display for IpVersion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IpVersion::V4 => write!(f, "IPv4"),
            IpVersion::V6 => write!(f, "IPv6"),
        }
    }
}

/// An IP prefix in canonical form: bits beyond `len` are zero.
///
/// Bits are stored right-aligned in the low 32 (v4) or full 128 (v6) bits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Prefix {
    version: IpVersion,
    bits: u128,
    len: u8,
}

impl Prefix {
    pub fn new(version: IpVersion, bits: u128, len: u8) -> Result<Self, AddrError> {
        let max = version.max_len();
        if len > max {
            return Err(AddrError::LengthOutOfRange { version, len, max });
        }
        if bits & !mask(version, len) != 0 {
            return Err(AddrError::HostBitsSet(len));
        }
        Ok(Prefix { version, bits, len })
    }

    /// The /32 or /128 prefix holding a single address.
    pub fn host(addr: IpAddr) -> Self {
        let (version, bits) = split(addr);
        Prefix { version, bits, len: version.max_len() }
    }

    pub fn version(&self) -> IpVersion {
        self.version
    }

    pub fn bits(&self) -> u128 {
        self.bits
    }

    pub fn len(&self) -> u8 {
        self.len
    }

    pub fn is_host(&self) -> bool {
        self.len == self.version.max_len()
    }

    pub fn network_addr(&self) -> IpAddr {
        join(self.version, self.bits)
    }

    /// Address at `offset` within the prefix, if it fits.
    pub fn addr_at(&self, offset: u128) -> Option<IpAddr> {
        if offset >= self.size() {
            return None;
        }
        Some(join(self.version, self.bits | offset))
    }

    /// Number of addresses covered. Saturates at `u128::MAX` for ::/0.
    pub fn size(&self) -> u128 {
        let host_bits = self.version.max_len() - self.len;
        1u128.checked_shl(host_bits as u32).unwrap_or(u128::MAX)
    }

    pub fn contains(&self, addr: IpAddr) -> bool {
        let (version, bits) = split(addr);
        version == self.version && bits & mask(version, self.len) == self.bits
    }

    /// True if `other` is equal to or nested inside `self`.
    pub fn covers(&self, other: &Prefix) -> bool {
        self.version == other.version
            && self.len <= other.len
            && other.bits & mask(self.version, self.len) == self.bits
    }

    pub fn overlaps(&self, other: &Prefix) -> bool {
        self.covers(other) || other.covers(self)
    }
}

fn mask(version: IpVersion, len: u8) -> u128 {
    let width = version.max_len();
    if len == 0 {
        0
    } else {
        (!0u128 >> (128 - width)) & (!0u128 << (width - len) >> (128 - width))
    }
}

fn split(addr: IpAddr) -> (IpVersion, u128) {
    match addr {
        IpAddr::V4(a) => (IpVersion::V4, u32::from(a) as u128),
        IpAddr::V6(a) => (IpVersion::V6, u128::from(a)),
    }
}

fn join(version: IpVersion, bits: u128) -> IpAddr {
    match version {
        IpVersion::V4 => IpAddr::V4(Ipv4Addr::from(bits as u32)),
        IpVersion::V6 => IpAddr::V6(Ipv6Addr::from(bits)),
    }
}

impl fmt::Display for Prefix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.network_addr(), self.len)
    }
}

impl FromStr for Prefix {
    type Err = AddrError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (addr_s, len_s) = s
            .split_once('/')
            .ok_or_else(|| AddrError::MalformedPrefix(s.to_string()))?;
        let addr: IpAddr = addr_s
            .parse()
            .map_err(|_| AddrError::MalformedPrefix(s.to_string()))?;
        let len: u8 = len_s
            .parse()
            .map_err(|_| AddrError::MalformedPrefix(s.to_string()))?;
        let (version, bits) = split(addr);
        Prefix::new(version, bits, len)
    }
}

impl Serialize for Prefix {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Prefix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pfx(s: &str) -> Prefix {
        s.parse().unwrap()
    }

    #[test]
    fn asn_rejects_zero() {
        assert!(AsNumber::new(0).is_none());
        assert_eq!("65001".parse::<AsNumber>().unwrap().get(), 65001);
        assert!("0".parse::<AsNumber>().is_err());
        assert!("-3".parse::<AsNumber>().is_err());
    }

    #[test]
    fn prefix_parse_roundtrip() {
        for s in ["1.0.0.0/24", "0.0.0.0/0", "10.1.2.3/32", "2001:db8::/48"] {
            assert_eq!(pfx(s).to_string(), s);
        }
    }

    #[test]
    fn prefix_rejects_host_bits() {
        assert_eq!(
            "1.0.0.1/24".parse::<Prefix>(),
            Err(AddrError::HostBitsSet(24))
        );
        assert!("1.0.0.0/33".parse::<Prefix>().is_err());
        assert!("1.0.0.0".parse::<Prefix>().is_err());
    }

    #[test]
    fn covers_and_contains() {
        let p = pfx("1.0.0.0/24");
        assert!(p.contains("1.0.0.200".parse().unwrap()));
        assert!(!p.contains("1.0.1.0".parse().unwrap()));
        assert!(!p.contains("::1".parse().unwrap()));
        assert!(p.covers(&pfx("1.0.0.128/25")));
        assert!(!pfx("1.0.0.128/25").covers(&p));
        assert!(pfx("0.0.0.0/0").covers(&p));
        assert!(!p.covers(&pfx("2001:db8::/48")));
        assert!(p.overlaps(&pfx("0.0.0.0/0")));
        assert!(!p.overlaps(&pfx("2.0.0.0/24")));
    }

    #[test]
    fn host_and_offsets() {
        let p = pfx("2.0.0.0/24");
        assert_eq!(p.size(), 256);
        assert_eq!(p.addr_at(1).unwrap().to_string(), "2.0.0.1");
        assert_eq!(p.addr_at(255).unwrap().to_string(), "2.0.0.255");
        assert!(p.addr_at(256).is_none());
        assert!(Prefix::host("2.0.0.7".parse().unwrap()).is_host());
    }
}
