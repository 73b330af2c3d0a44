//! OBD-II service 01 payload decoding.
//!
//! PIDs are described by a registry loaded from a small delimited data file
//! (`data/pids.csv` is compiled in as the default). Each descriptor names a
//! [`Scaling`] that turns the raw response bytes into a physical value.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Read;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

const DEFAULT_REGISTRY: &str = include_str!("../data/pids.csv");

/// Services whose PIDs share the "current data" decoding rules.
const DATA_SERVICES: [u8; 2] = [0x01, 0x02];

#[derive(Debug, Error, PartialEq)]
pub enum ObdError {
    #[error("unknown PID {pid:#04x} for service {service:#04x}")]
    UnknownPid { service: u8, pid: u8 },
    #[error("PID {pid:#04x} expects {expected} data bytes, got {actual}")]
    PayloadLengthMismatch { pid: u8, expected: usize, actual: usize },
    #[error("service {0:#04x} is registered but has no payload decoder")]
    UndecodableService(u8),
    #[error("registry line {line}: {message}")]
    Registry { line: u64, message: String },
    #[error("invalid hex input {0:?}")]
    InvalidHex(String),
}

/// Named conversion from raw bytes to a physical value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scaling {
    /// `A`
    Identity,
    /// `A * 100 / 255`
    Percent,
    /// `(256A + B) / 4`
    Rpm,
    /// `A - 40`
    Offset40,
    /// `(A - 128) * 100 / 128`
    FuelTrim,
    /// `(256A + B) / 100`
    CentiU16,
    FuelSystemStatus,
    TemperatureSensors,
}

impl Scaling {
    pub fn name(self) -> &'static str {
        match self {
            Scaling::Identity => "identity",
            Scaling::Percent => "percent",
            Scaling::Rpm => "rpm",
            Scaling::Offset40 => "offset40",
            Scaling::FuelTrim => "fuel_trim",
            Scaling::CentiU16 => "centi_u16",
            Scaling::FuelSystemStatus => "fuel_system_status",
            Scaling::TemperatureSensors => "temperature_sensors",
        }
    }

    /// True for scalings that produce a single number from the whole payload.
    pub fn is_scalar(self) -> bool {
        !matches!(self, Scaling::FuelSystemStatus | Scaling::TemperatureSensors)
    }

    /// Byte count the formula consumes, when it is fixed.
    fn formula_bytes(self) -> Option<usize> {
        match self {
            Scaling::Identity | Scaling::Percent | Scaling::Offset40 | Scaling::FuelTrim => Some(1),
            Scaling::Rpm | Scaling::CentiU16 | Scaling::FuelSystemStatus => Some(2),
            Scaling::TemperatureSensors => None,
        }
    }

    fn scalar(self, raw: &[u8]) -> f64 {
        let a = f64::from(raw[0]);
        let word = || 256.0 * a + f64::from(raw[1]);
        match self {
            Scaling::Identity => a,
            Scaling::Percent => a * 100.0 / 255.0,
            Scaling::Rpm => word() / 4.0,
            Scaling::Offset40 => a - 40.0,
            Scaling::FuelTrim => (a - 128.0) * 100.0 / 128.0,
            Scaling::CentiU16 => word() / 100.0,
            Scaling::FuelSystemStatus | Scaling::TemperatureSensors => {
                unreachable!("non-scalar scaling")
            }
        }
    }

    /// Smallest and largest value the formula can produce. Every scalar
    /// formula is monotone non-decreasing in the payload, so the extremes
    /// sit at the all-zero and all-0xFF payloads.
    pub fn output_bounds(self, data_bytes: usize) -> Option<(f64, f64)> {
        match self {
            Scaling::FuelSystemStatus => None,
            Scaling::TemperatureSensors => Some((-40.0, 215.0)),
            _ => {
                let lo = self.scalar(&vec![0x00; data_bytes]);
                let hi = self.scalar(&vec![0xFF; data_bytes]);
                Some((lo, hi))
            }
        }
    }
}

impl FromStr for Scaling {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s.trim() {
            "identity" => Scaling::Identity,
            "percent" => Scaling::Percent,
            "rpm" => Scaling::Rpm,
            "offset40" => Scaling::Offset40,
            "fuel_trim" => Scaling::FuelTrim,
            "centi_u16" => Scaling::CentiU16,
            "fuel_system_status" => Scaling::FuelSystemStatus,
            "temperature_sensors" => Scaling::TemperatureSensors,
            other => return Err(format!("unknown scaling {other:?}")),
        })
    }
}

/// Static metadata for one PID.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PidDescriptor {
    pub service: u8,
    pub pid: u8,
    pub data_bytes: usize,
    pub description: String,
    pub min_value: Option<f64>,
    pub max_value: Option<f64>,
    pub unit: Option<String>,
    pub scaling: Scaling,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ServiceDescriptor {
    pub code: u8,
    pub description: &'static str,
    pub decodable: bool,
}

/// OBD-II services known to the registry.
pub const SERVICES: [ServiceDescriptor; 4] = [
    ServiceDescriptor { code: 0x01, description: "Show current data", decodable: true },
    ServiceDescriptor { code: 0x02, description: "Show freeze frame data", decodable: true },
    ServiceDescriptor { code: 0x09, description: "Request vehicle information", decodable: false },
    ServiceDescriptor {
        code: 0x0A,
        description: "Permanent Diagnostic Trouble Codes",
        decodable: false,
    },
];

/// Fuel system status for one bank (PID 0x03).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FuelSystemStatus {
    NotPresent,
    OpenLoopInsufficientTemperature,
    ClosedLoop,
    OpenLoopEngineLoad,
    OpenLoopSystemFailure,
    ClosedLoopFeedbackFault,
    Invalid(u8),
}

impl From<u8> for FuelSystemStatus {
    fn from(b: u8) -> Self {
        match b {
            0x00 => FuelSystemStatus::NotPresent,
            0x01 => FuelSystemStatus::OpenLoopInsufficientTemperature,
            0x02 => FuelSystemStatus::ClosedLoop,
            0x04 => FuelSystemStatus::OpenLoopEngineLoad,
            0x08 => FuelSystemStatus::OpenLoopSystemFailure,
            0x10 => FuelSystemStatus::ClosedLoopFeedbackFault,
            other => FuelSystemStatus::Invalid(other),
        }
    }
}

impl FuelSystemStatus {
    fn byte(self) -> u8 {
        match self {
            FuelSystemStatus::NotPresent => 0x00,
            FuelSystemStatus::OpenLoopInsufficientTemperature => 0x01,
            FuelSystemStatus::ClosedLoop => 0x02,
            FuelSystemStatus::OpenLoopEngineLoad => 0x04,
            FuelSystemStatus::OpenLoopSystemFailure => 0x08,
            FuelSystemStatus::ClosedLoopFeedbackFault => 0x10,
            FuelSystemStatus::Invalid(b) => b,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensorTemperature {
    /// 1-based sensor number.
    pub sensor: u8,
    pub supported: bool,
    pub celsius: f64,
}

/// Decoded physical value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum PidValue {
    Scalar {
        value: f64,
        unit: String,
    },
    FuelSystem {
        bank1: FuelSystemStatus,
        bank2: FuelSystemStatus,
    },
    Temperatures {
        /// Raw support byte; bit `i` flags sensor `i + 1`.
        support: u8,
        sensors: Vec<SensorTemperature>,
        unit: String,
    },
}

impl PidValue {
    pub fn as_scalar(&self) -> Option<f64> {
        match self {
            PidValue::Scalar { value, .. } => Some(*value),
            _ => None,
        }
    }
}

impl fmt::Display for PidValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PidValue::Scalar { value, unit } => write!(f, "{value} {unit}"),
            PidValue::FuelSystem { bank1, bank2 } => {
                write!(f, "bank1={bank1:?} bank2={bank2:?}")
            }
            PidValue::Temperatures { sensors, unit, .. } => {
                let parts: Vec<String> = sensors
                    .iter()
                    .map(|s| {
                        let flag = if s.supported { "" } else { " (unsupported)" };
                        format!("sensor{}={} {unit}{flag}", s.sensor, s.celsius)
                    })
                    .collect();
                f.write_str(&parts.join(", "))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PidReading {
    pub descriptor: PidDescriptor,
    pub raw: Vec<u8>,
    pub value: PidValue,
}

/// Immutable lookup table of PID descriptors keyed by (service, pid).
#[derive(Debug, Clone)]
pub struct PidRegistry {
    pids: BTreeMap<(u8, u8), PidDescriptor>,
}

impl PidRegistry {
    /// The registry shipped with the crate.
    pub fn builtin() -> Self {
        Self::from_reader(DEFAULT_REGISTRY.as_bytes()).expect("bundled PID registry is valid")
    }

    pub fn from_reader<R: Read>(reader: R) -> Result<Self, ObdError> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .flexible(false)
            .from_reader(reader);
        let mut pids = BTreeMap::new();
        for record in rdr.records() {
            let record = record.map_err(|e| ObdError::Registry {
                line: e.position().map_or(0, |p| p.line()),
                message: e.to_string(),
            })?;
            let line = record.position().map_or(0, |p| p.line());
            let desc = parse_descriptor(&record)
                .map_err(|message| ObdError::Registry { line, message })?;
            validate_descriptor(&desc).map_err(|message| ObdError::Registry { line, message })?;
            if pids.insert((desc.service, desc.pid), desc).is_some() {
                return Err(ObdError::Registry { line, message: "duplicate PID".into() });
            }
        }
        Ok(Self { pids })
    }

    pub fn lookup(&self, service: u8, pid: u8) -> Option<&PidDescriptor> {
        let service = if DATA_SERVICES.contains(&service) { 0x01 } else { service };
        self.pids.get(&(service, pid))
    }

    pub fn descriptors(&self) -> impl Iterator<Item = &PidDescriptor> {
        self.pids.values()
    }

    pub fn services(&self) -> &'static [ServiceDescriptor] {
        &SERVICES
    }

    pub fn len(&self) -> usize {
        self.pids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pids.is_empty()
    }

    pub fn decode(&self, service: u8, pid: u8, payload: &[u8]) -> Result<PidReading, ObdError> {
        if let Some(svc) = SERVICES.iter().find(|s| s.code == service) {
            if !svc.decodable {
                return Err(ObdError::UndecodableService(service));
            }
        }
        let descriptor = self.lookup(service, pid).ok_or(ObdError::UnknownPid { service, pid })?;
        decode_with(descriptor, payload)
    }
}

impl Default for PidRegistry {
    fn default() -> Self {
        Self::builtin()
    }
}

/// Decodes `payload` using an explicit descriptor.
pub fn decode_with(descriptor: &PidDescriptor, payload: &[u8]) -> Result<PidReading, ObdError> {
    if payload.len() != descriptor.data_bytes {
        return Err(ObdError::PayloadLengthMismatch {
            pid: descriptor.pid,
            expected: descriptor.data_bytes,
            actual: payload.len(),
        });
    }
    let unit = descriptor.unit.clone().unwrap_or_default();
    let value = match descriptor.scaling {
        Scaling::FuelSystemStatus => {
            PidValue::FuelSystem { bank1: payload[0].into(), bank2: payload[1].into() }
        }
        Scaling::TemperatureSensors => {
            let support = payload[0];
            let sensors = payload[1..]
                .iter()
                .enumerate()
                .map(|(i, &b)| SensorTemperature {
                    sensor: i as u8 + 1,
                    supported: i < 8 && support & (1 << i) != 0,
                    celsius: f64::from(b) - 40.0,
                })
                .collect();
            PidValue::Temperatures { support, sensors, unit }
        }
        scaling => PidValue::Scalar { value: scaling.scalar(payload), unit },
    };
    Ok(PidReading { descriptor: descriptor.clone(), raw: payload.to_vec(), value })
}

/// Inverse of the affine scalings; `None` for non-scalar PIDs or values that
/// do not land exactly on a representable payload.
pub fn encode(descriptor: &PidDescriptor, value: &PidValue) -> Option<Vec<u8>> {
    match (descriptor.scaling, value) {
        (Scaling::FuelSystemStatus, PidValue::FuelSystem { bank1, bank2 }) => {
            Some(vec![bank1.byte(), bank2.byte()])
        }
        (Scaling::TemperatureSensors, PidValue::Temperatures { support, sensors, .. }) => {
            let mut out = vec![*support];
            for s in sensors {
                out.push(to_byte(s.celsius + 40.0)?);
            }
            (out.len() == descriptor.data_bytes).then_some(out)
        }
        (scaling, PidValue::Scalar { value, .. }) if scaling.is_scalar() => {
            let raw = match scaling {
                Scaling::Identity => f64::from(to_byte(*value)?),
                Scaling::Percent => (*value * 255.0 / 100.0).round(),
                Scaling::Offset40 => value + 40.0,
                Scaling::FuelTrim => (value * 128.0 / 100.0 + 128.0).round(),
                Scaling::Rpm => value * 4.0,
                Scaling::CentiU16 => (value * 100.0).round(),
                _ => return None,
            };
            let bytes = match scaling.formula_bytes()? {
                1 => vec![to_byte(raw)?],
                _ => {
                    if !(0.0..=65535.0).contains(&raw) || raw.fract() != 0.0 {
                        return None;
                    }
                    let w = raw as u16;
                    vec![(w >> 8) as u8, w as u8]
                }
            };
            (bytes.len() == descriptor.data_bytes).then_some(bytes)
        }
        _ => None,
    }
}

fn to_byte(x: f64) -> Option<u8> {
    ((0.0..=255.0).contains(&x) && x.fract() == 0.0).then_some(x as u8)
}

/// Parses a hex byte such as `0C`, `0x0c` or `c`.
pub fn parse_hex_u8(s: &str) -> Result<u8, ObdError> {
    let t = s.trim();
    let t = t.strip_prefix("0x").or_else(|| t.strip_prefix("0X")).unwrap_or(t);
    u8::from_str_radix(t, 16).map_err(|_| ObdError::InvalidHex(s.to_string()))
}

/// Parses a payload such as `1AF8` or `1a f8`.
pub fn parse_hex_bytes(s: &str) -> Result<Vec<u8>, ObdError> {
    let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    let compact =
        compact.strip_prefix("0x").or_else(|| compact.strip_prefix("0X")).unwrap_or(&compact);
    if !compact.len().is_multiple_of(2) || !compact.is_ascii() {
        return Err(ObdError::InvalidHex(s.to_string()));
    }
    (0..compact.len())
        .step_by(2)
        .map(|i| {
            u8::from_str_radix(&compact[i..i + 2], 16)
                .map_err(|_| ObdError::InvalidHex(s.to_string()))
        })
        .collect()
}

fn parse_descriptor(record: &csv::StringRecord) -> Result<PidDescriptor, String> {
    if record.len() != 8 {
        return Err(format!("expected 8 fields, found {}", record.len()));
    }
    let hex = |i: usize| parse_hex_u8(&record[i]).map_err(|e| e.to_string());
    let opt_f64 = |i: usize| -> Result<Option<f64>, String> {
        let s = &record[i];
        if s.is_empty() {
            Ok(None)
        } else {
            s.parse::<f64>().map(Some).map_err(|_| format!("bad number {s:?}"))
        }
    };
    let unit = (!record[7].is_empty()).then(|| record[7].to_string());
    Ok(PidDescriptor {
        service: hex(0)?,
        pid: hex(1)?,
        data_bytes: record[2].parse().map_err(|_| format!("bad byte count {:?}", &record[2]))?,
        description: record[3].to_string(),
        scaling: record[4].parse()?,
        min_value: opt_f64(5)?,
        max_value: opt_f64(6)?,
        unit,
    })
}

fn validate_descriptor(d: &PidDescriptor) -> Result<(), String> {
    if d.data_bytes == 0 {
        return Err("data_bytes must be at least 1".into());
    }
    match d.scaling.formula_bytes() {
        Some(n) if n != d.data_bytes => {
            return Err(format!("scaling {} needs {n} bytes", d.scaling.name()))
        }
        None if d.data_bytes < 2 => {
            return Err("temperature_sensors needs a support byte and a sensor byte".into())
        }
        _ => {}
    }
    match (d.min_value, d.max_value) {
        (Some(lo), Some(hi)) => {
            if lo >= hi {
                return Err(format!("min {lo} must be below max {hi}"));
            }
            if let Some((out_lo, out_hi)) = d.scaling.output_bounds(d.data_bytes) {
                if out_lo < lo - 1e-9 || out_hi > hi + 1e-9 {
                    return Err(format!("scaling range [{out_lo}, {out_hi}] exceeds [{lo}, {hi}]"));
                }
            }
        }
        (None, None) if !d.scaling.is_scalar() => {}
        (None, None) => return Err("numeric PID needs min and max".into()),
        _ => return Err("min and max must both be present or both absent".into()),
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn reg() -> PidRegistry {
        PidRegistry::builtin()
    }

    #[test]
    fn registry_covers_reference_rows() {
        let r = reg();
        for pid in [0x03, 0x04, 0x0C, 0x0D, 0x68] {
            assert!(r.lookup(0x01, pid).is_some(), "missing {pid:#x}");
        }
        let rpm = r.lookup(0x01, 0x0C).unwrap();
        assert_eq!(rpm.data_bytes, 2);
        assert_eq!(rpm.max_value, Some(16_383.75));
        let speed = r.lookup(0x01, 0x0D).unwrap();
        assert_eq!(
            (speed.min_value, speed.max_value, speed.data_bytes),
            (Some(0.0), Some(255.0), 1)
        );
        assert_eq!(speed.unit.as_deref(), Some("km/h"));
        assert!(r.lookup(0x01, 0xFF).is_none());
        let codes: Vec<u8> = r.services().iter().map(|s| s.code).collect();
        assert_eq!(codes, vec![0x01, 0x02, 0x09, 0x0A]);
        assert_eq!(r.lookup(0x01, 0x68).unwrap().data_bytes, 3);
    }

    #[test]
    fn decode_examples() {
        let r = reg();
        let v = |s, p, b: &[u8]| r.decode(s, p, b).unwrap().value.as_scalar().unwrap();
        assert_eq!(v(0x01, 0x0C, &[0xFF, 0xFF]), 16_383.75);
        assert_eq!(v(0x01, 0x04, &[0x00]), 0.0);
        // (256 * 26 + 248) / 4
        assert_eq!(v(0x01, 0x0C, &[0x1A, 0xF8]), 1726.0);
        assert_eq!(v(0x01, 0x0D, &[0x80]), 128.0);
        assert_eq!(v(0x01, 0x05, &[0x00]), -40.0);
        assert_eq!(v(0x02, 0x0D, &[0x10]), 16.0);
    }

    #[test]
    fn decode_errors() {
        let r = reg();
        assert_eq!(
            r.decode(0x01, 0xFF, &[0]).unwrap_err(),
            ObdError::UnknownPid { service: 0x01, pid: 0xFF }
        );
        assert_eq!(
            r.decode(0x01, 0x0C, &[0x1A]).unwrap_err(),
            ObdError::PayloadLengthMismatch { pid: 0x0C, expected: 2, actual: 1 }
        );
        assert!(matches!(
            r.decode(0x01, 0x0D, &[1, 2]),
            Err(ObdError::PayloadLengthMismatch { .. })
        ));
        assert_eq!(r.decode(0x0A, 0x00, &[]).unwrap_err(), ObdError::UndecodableService(0x0A));
    }

    #[test]
    fn fuel_system_status_is_bitfield() {
        let reading = reg().decode(0x01, 0x03, &[0x02, 0x00]).unwrap();
        assert_eq!(
            reading.value,
            PidValue::FuelSystem {
                bank1: FuelSystemStatus::ClosedLoop,
                bank2: FuelSystemStatus::NotPresent
            }
        );
        assert!(reading.value.as_scalar().is_none());
    }

    #[test]
    fn intake_temperature_sensors() {
        let reading = reg().decode(0x01, 0x68, &[0b01, 0x00, 0xFF]).unwrap();
        let PidValue::Temperatures { sensors, .. } = reading.value else {
            panic!("expected temperatures")
        };
        assert_eq!(sensors.len(), 2);
        assert_eq!((sensors[0].supported, sensors[0].celsius), (true, -40.0));
        assert_eq!((sensors[1].supported, sensors[1].celsius), (false, 215.0));
    }

    #[test]
    fn numeric_pids_hit_range_endpoints() {
        for d in reg().descriptors().filter(|d| d.scaling.is_scalar()) {
            let lo = decode_with(d, &vec![0x00; d.data_bytes]).unwrap().value.as_scalar().unwrap();
            let hi = decode_with(d, &vec![0xFF; d.data_bytes]).unwrap().value.as_scalar().unwrap();
            assert_eq!(Some(lo), d.min_value, "{}", d.description);
            assert_eq!(Some(hi), d.max_value, "{}", d.description);
        }
    }

    #[test]
    fn every_payload_stays_in_range() {
        for d in reg().descriptors() {
            let (Some(lo), Some(hi)) = (d.min_value, d.max_value) else { continue };
            let n = if d.data_bytes <= 2 { 1usize << (8 * d.data_bytes) } else { 256 };
            for k in 0..n {
                let payload: Vec<u8> = if d.data_bytes <= 2 {
                    (0..d.data_bytes).rev().map(|s| (k >> (8 * s)) as u8).collect()
                } else {
                    vec![k as u8; d.data_bytes]
                };
                match decode_with(d, &payload).unwrap().value {
                    PidValue::Scalar { value, .. } => assert!((lo..=hi).contains(&value)),
                    PidValue::Temperatures { sensors, .. } => {
                        assert!(sensors.iter().all(|s| (lo..=hi).contains(&s.celsius)))
                    }
                    PidValue::FuelSystem { .. } => {}
                }
            }
        }
    }

    #[test]
    fn rejects_bad_registry_rows() {
        let bad = [
            "01,0D,0,x,identity,0,255,km/h",
            "01,0D,1,x,identity,255,0,km/h",
            "01,0D,1,x,percent,0,50,%",
            "01,0D,2,x,identity,0,255,km/h",
            "01,0D,1,x,warp,0,255,km/h",
            "01,0D,1,x,identity,,255,km/h",
        ];
        for row in bad {
            assert!(PidRegistry::from_reader(row.as_bytes()).is_err(), "{row}");
        }
        let dup = "01,0D,1,a,identity,0,255,km/h\n01,0D,1,b,identity,0,255,km/h\n";
        assert!(PidRegistry::from_reader(dup.as_bytes()).is_err());
    }

    #[test]
    fn registry_is_extensible() {
        let extra =
            format!("{DEFAULT_REGISTRY}01,33,1,Absolute barometric pressure,identity,0,255,kPa\n");
        let r = PidRegistry::from_reader(extra.as_bytes()).unwrap();
        assert_eq!(r.len(), reg().len() + 1);
        assert_eq!(r.decode(0x01, 0x33, &[101]).unwrap().value.as_scalar(), Some(101.0));
    }

    #[test]
    fn hex_parsing() {
        assert_eq!(parse_hex_bytes("1AF8").unwrap(), vec![0x1A, 0xF8]);
        assert_eq!(parse_hex_bytes("1a f8").unwrap(), vec![0x1A, 0xF8]);
        assert_eq!(parse_hex_u8("0x0c").unwrap(), 0x0C);
        assert!(parse_hex_bytes("1AF").is_err());
        assert!(parse_hex_bytes("zz").is_err());
    }

    proptest! {
        #[test]
        fn affine_round_trip(pid_idx in 0usize..64, bytes in proptest::collection::vec(any::<u8>(), 3)) {
            let r = reg();
            let descs: Vec<&PidDescriptor> = r.descriptors().collect();
            let d = descs[pid_idx % descs.len()];
            let payload = &bytes[..d.data_bytes];
            let reading = decode_with(d, payload).unwrap();
            prop_assert_eq!(encode(d, &reading.value), Some(payload.to_vec()));
            prop_assert_eq!(decode_with(d, payload).unwrap(), reading);
        }
    }
}
