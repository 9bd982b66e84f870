//! File formats.
//!
//! Code specs and reports are pretty-printed JSON with a trailing newline.
//! Streams, frames, messages and masks are line based: a header of
//! `key=value` pairs, then one line per block with whitespace-separated
//! tokens. Field elements are big-endian hex, zero-padded to a fixed width;
//! `*` marks an erased symbol.
//!
//! ```text
//! n=5 k=3 gamma=3 field=2^409
//! 0a1f... * 0003... ...
//! ```

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::convcode::{code_degree, mdp_horizon, PolyGenerator};
use crate::decoder::{DecodeReport, ErasureSymbol, ReceivedStream};
use crate::error::{Error, Result};
use crate::field::{Fe, Field, FieldSpec};
use crate::matrix::Matrix;
use crate::rng::SplitMix64;
use crate::sysrep::{construct_example_532, generator_of, membership_check, realize, StateSpace};

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

pub fn from_json<T: DeserializeOwned>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::parse(e.line(), e.column(), e.to_string()))
}

/// Checks that `bytes` are UTF-8, reporting the first bad byte's position.
pub fn utf8(bytes: &[u8]) -> Result<&str> {
    std::str::from_utf8(bytes).map_err(|e| {
        let good = &bytes[..e.valid_up_to()];
        let line = good.iter().filter(|&&b| b == b'\n').count() + 1;
        let column = good.len() - good.iter().rposition(|&b| b == b'\n').map_or(0, |i| i + 1) + 1;
        Error::parse(line, column, "invalid UTF-8")
    })
}

type HexMatrix = Vec<Vec<String>>;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FieldFile {
    characteristic: u64,
    degree: usize,
    modulus: String,
    generator: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SystemFile {
    a: HexMatrix,
    b: HexMatrix,
    c: HexMatrix,
    d: HexMatrix,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CodeSpecFile {
    field: FieldFile,
    n: usize,
    k: usize,
    delta: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    generator: Option<Vec<HexMatrix>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    system: Option<SystemFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    delay: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    window: Option<usize>,
}

/// A code given by a generator, a state-space system, or both, with
/// optional decoding parameters `T` (`delay`) and `L` (`window`).
#[derive(Clone, Debug, PartialEq)]
pub struct CodeSpec {
    pub field: Field,
    pub n: usize,
    pub k: usize,
    pub delta: usize,
    pub generator: Option<PolyGenerator>,
    pub system: Option<StateSpace>,
    pub delay: Option<usize>,
    pub window: Option<usize>,
}

fn hex_matrix(f: &Field, m: &Matrix) -> HexMatrix {
    m.to_rows().iter().map(|r| r.iter().map(|e| f.to_hex(e)).collect()).collect()
}

fn read_matrix(f: &Field, name: &str, rows: usize, cols: usize, m: &HexMatrix) -> Result<Matrix> {
    if m.len() != rows || m.iter().any(|r| r.len() != cols) {
        return Err(Error::shape(format!("{name} must be {rows}x{cols}")));
    }
    let entries = m
        .iter()
        .enumerate()
        .map(|(i, r)| {
            r.iter()
                .enumerate()
                .map(|(j, h)| f.from_hex(h).map_err(|e| Error::InvalidField(format!("{name}[{i}][{j}]: {e}"))))
                .collect()
        })
        .collect::<Result<Vec<Vec<Fe>>>>()?;
    Matrix::from_rows(entries, cols)
}

impl CodeSpec {
    pub fn from_system(sys: &StateSpace, generator: Option<PolyGenerator>) -> Result<Self> {
        let g = match generator {
            Some(g) => g,
            None => generator_of(sys)?,
        };
        Ok(Self {
            field: sys.field().clone(),
            n: sys.n(),
            k: sys.k(),
            delta: code_degree(&g),
            generator: Some(g),
            system: Some(sys.clone()),
            delay: None,
            window: None,
        })
    }

    /// The (5,3,2) example over the default large field with `T = L = 1`.
    pub fn example() -> Result<Self> {
        let sys = construct_example_532(&Field::example_field())?;
        let mut spec = Self::from_system(&sys, None)?;
        spec.delay = Some(1);
        spec.window = Some(mdp_horizon(spec.n, spec.k, spec.delta));
        Ok(spec)
    }

    pub fn system(&self) -> Result<StateSpace> {
        match (&self.system, &self.generator) {
            (Some(s), _) => Ok(s.clone()),
            (None, Some(g)) => realize(g),
            (None, None) => Err(Error::shape("code spec has neither generator nor system")),
        }
    }

    pub fn generator(&self) -> Result<PolyGenerator> {
        match (&self.generator, &self.system) {
            (Some(g), _) => Ok(g.clone()),
            (None, Some(s)) => generator_of(s),
            (None, None) => Err(Error::shape("code spec has neither generator nor system")),
        }
    }

    /// `L`, declared or computed from `n, k, δ`.
    pub fn big_window(&self) -> usize {
        self.window.unwrap_or_else(|| mdp_horizon(self.n, self.k, self.delta))
    }

    pub fn to_text(&self) -> String {
        let f = &self.field;
        let spec = f.spec();
        let file = CodeSpecFile {
            field: FieldFile {
                characteristic: spec.characteristic,
                degree: spec.degree,
                modulus: spec.modulus_hex(),
                generator: f.to_hex(&spec.generator),
            },
            n: self.n,
            k: self.k,
            delta: self.delta,
            generator: self.generator.as_ref().map(|g| g.coeffs().iter().map(|m| hex_matrix(f, m)).collect()),
            system: self.system.as_ref().map(|s| SystemFile {
                a: hex_matrix(f, s.a()),
                b: hex_matrix(f, s.b()),
                c: hex_matrix(f, s.c()),
                d: hex_matrix(f, s.d()),
            }),
            delay: self.delay,
            window: self.window,
        };
        to_json(&file)
    }

    /// Parses and validates a code spec. When both a generator and a system
    /// are given they must describe the same code.
    pub fn parse(text: &str) -> Result<Self> {
        let file: CodeSpecFile = from_json(text)?;
        let ff = &file.field;
        let modulus = FieldSpec::modulus_from_hex(ff.characteristic, ff.degree, &ff.modulus)?;
        let base = Field::from_modulus(ff.characteristic, modulus)?;
        let field = base.with_generator(base.from_hex(&ff.generator)?)?;
        let (n, k) = (file.n, file.k);
        if k == 0 || n <= k {
            return Err(Error::shape(format!("need 0 < k < n, got n = {n}, k = {k}")));
        }
        let generator = match &file.generator {
            Some(coeffs) => {
                let mats = coeffs
                    .iter()
                    .enumerate()
                    .map(|(i, m)| read_matrix(&field, &format!("generator[{i}]"), n, k, m))
                    .collect::<Result<Vec<_>>>()?;
                Some(PolyGenerator::new(&field, n, k, mats)?)
            }
            None => None,
        };
        let system = match &file.system {
            Some(sf) => {
                let s = sf.a.len();
                let a = read_matrix(&field, "a", s, s, &sf.a)?;
                let b = read_matrix(&field, "b", s, k, &sf.b)?;
                let c = read_matrix(&field, "c", n - k, s, &sf.c)?;
                let d = read_matrix(&field, "d", n - k, k, &sf.d)?;
                Some(StateSpace::new(&field, a, b, c, d)?)
            }
            None => None,
        };
        let spec = Self {
            field,
            n,
            k,
            delta: file.delta,
            generator,
            system,
            delay: file.delay,
            window: file.window,
        };
        spec.validate()?;
        Ok(spec)
    }

    fn validate(&self) -> Result<()> {
        let mismatch = |what: &str, got: usize| {
            Err(Error::Integrity(format!("declared degree {} but the {what} has degree {got}", self.delta)))
        };
        if let Some(g) = &self.generator {
            let d = code_degree(g);
            if d != self.delta {
                return mismatch("generator", d);
            }
        }
        if let Some(s) = &self.system {
            let d = code_degree(&generator_of(s)?);
            if d != self.delta {
                return mismatch("system", d);
            }
        }
        if let (Some(g), Some(s)) = (&self.generator, &self.system) {
            let mut rng = SplitMix64::new(0);
            for len in 1..=8 {
                let message: Vec<Vec<Fe>> = (0..len).map(|_| (0..self.k).map(|_| self.field.random(&mut rng)).collect()).collect();
                let word = crate::convcode::encode(g, &message)?;
                if !membership_check(s, &word, true) {
                    return Err(Error::Integrity("generator and system describe different codes".into()));
                }
            }
        }
        Ok(())
    }
}

/// Header of a line-based file.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Header(pub Vec<(String, String)>);

impl Header {
    pub fn get(&self, key: &str) -> Option<&str> {
        self.0.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    fn render(&self) -> String {
        self.0.iter().map(|(k, v)| format!("{k}={v}")).collect::<Vec<_>>().join(" ")
    }
}

struct Token<'a> {
    text: &'a str,
    line: usize,
    column: usize,
}

/// Splits into header and body lines of tokens, all 1-based positions.
fn tokenize(text: &str) -> Result<(Header, Vec<Vec<Token<'_>>>)> {
    let mut lines = text.lines().enumerate().map(|(i, l)| {
        let mut tokens = Vec::new();
        let mut rest = l;
        let mut offset = 0;
        while let Some(start) = rest.find(|c: char| !c.is_whitespace()) {
            let tail = &rest[start..];
            let len = tail.find(char::is_whitespace).unwrap_or(tail.len());
            tokens.push(Token {
                text: &tail[..len],
                line: i + 1,
                column: l[..offset + start].chars().count() + 1,
            });
            offset += start + len;
            rest = &tail[len..];
        }
        tokens
    });
    let header_tokens = lines.next().ok_or_else(|| Error::parse(1, 1, "empty file"))?;
    let mut header = Vec::new();
    for t in header_tokens {
        let (k, v) = t
            .text
            .split_once('=')
            .ok_or_else(|| Error::parse(t.line, t.column, format!("expected key=value, found `{}`", t.text)))?;
        header.push((k.to_string(), v.to_string()));
    }
    let body: Vec<Vec<Token>> = lines.collect();
    let used = body.iter().rposition(|l| !l.is_empty()).map_or(0, |i| i + 1);
    let mut body = body;
    body.truncate(used);
    Ok((Header(header), body))
}

fn header_usize(h: &Header, key: &str) -> Result<usize> {
    let v = h.get(key).ok_or_else(|| Error::parse(1, 1, format!("header lacks `{key}`")))?;
    v.parse().map_err(|_| Error::parse(1, 1, format!("`{key}` is not a nonnegative integer: `{v}`")))
}

fn header_field(h: &Header, f: &Field) -> Result<()> {
    match h.get("field") {
        Some(r) if r == f.reference() => Ok(()),
        Some(r) => Err(Error::parse(1, 1, format!("file is over GF({r}), code is over GF({})", f.reference()))),
        None => Err(Error::parse(1, 1, "header lacks `field`")),
    }
}

fn parse_rows(f: &Field, body: &[Vec<Token>], width: usize, allow_erasures: bool) -> Result<Vec<Vec<ErasureSymbol>>> {
    body.iter()
        .enumerate()
        .map(|(i, line)| {
            if line.len() != width {
                let (l, c) = line.first().map_or((i + 2, 1), |t| (t.line, t.column));
                return Err(Error::parse(l, c, format!("expected {width} symbols, found {}", line.len())));
            }
            line.iter()
                .map(|t| match t.text {
                    "*" if allow_erasures => Ok(ErasureSymbol::Erased),
                    "*" => Err(Error::parse(t.line, t.column, "erasure in a file that must be complete")),
                    h => f
                        .from_hex(h)
                        .map(ErasureSymbol::Known)
                        .map_err(|e| Error::parse(t.line, t.column, e.to_string())),
                })
                .collect()
        })
        .collect()
}

fn write_rows<'a>(f: &Field, header: Header, rows: impl Iterator<Item = Vec<Option<&'a Fe>>>) -> String {
    let mut out = header.render();
    out.push('\n');
    for row in rows {
        let tokens: Vec<String> = row.iter().map(|e| e.map_or_else(|| "*".to_string(), |e| f.to_hex(e))).collect();
        out.push_str(&tokens.join(" "));
        out.push('\n');
    }
    out
}

fn stream_header(n: usize, k: usize, gamma: usize, f: &Field) -> Header {
    Header(vec![
        ("n".into(), n.to_string()),
        ("k".into(), k.to_string()),
        ("gamma".into(), gamma.to_string()),
        ("field".into(), f.reference()),
    ])
}

pub fn write_stream(f: &Field, s: &ReceivedStream) -> String {
    write_rows(
        f,
        stream_header(s.n(), s.k(), s.gamma(), f),
        s.blocks().iter().map(|b| b.iter().map(ErasureSymbol::value).collect()),
    )
}

pub fn parse_stream(f: &Field, text: &str) -> Result<ReceivedStream> {
    let (h, body) = tokenize(text)?;
    let (n, k, gamma) = (header_usize(&h, "n")?, header_usize(&h, "k")?, header_usize(&h, "gamma")?);
    header_field(&h, f)?;
    let blocks = parse_rows(f, &body, n, true)?;
    ReceivedStream::new(n, k, gamma, blocks)
}

/// A complete codeword in stream layout; erasures are rejected.
pub fn write_frame(f: &Field, n: usize, k: usize, gamma: usize, blocks: &[Vec<Fe>]) -> String {
    write_rows(f, stream_header(n, k, gamma, f), blocks.iter().map(|b| b.iter().map(Some).collect()))
}

pub fn parse_frame(f: &Field, text: &str) -> Result<ReceivedStream> {
    let (h, body) = tokenize(text)?;
    let (n, k, gamma) = (header_usize(&h, "n")?, header_usize(&h, "k")?, header_usize(&h, "gamma")?);
    header_field(&h, f)?;
    let blocks = parse_rows(f, &body, n, false)?;
    ReceivedStream::new(n, k, gamma, blocks)
}

/// The decoded stream: received and recovered symbols, `*` where lost.
pub fn stream_from_report(r: &DecodeReport) -> Result<ReceivedStream> {
    let blocks = r
        .values
        .iter()
        .map(|b| b.iter().map(|v| v.clone().map_or(ErasureSymbol::Erased, ErasureSymbol::Known)).collect())
        .collect();
    ReceivedStream::new(r.n, r.k, r.gamma, blocks)
}

pub fn write_message(f: &Field, message: &[Vec<Fe>]) -> String {
    let k = message.first().map_or(0, Vec::len);
    let header = Header(vec![("k".into(), k.to_string()), ("field".into(), f.reference())]);
    write_rows(f, header, message.iter().map(|b| b.iter().map(Some).collect()))
}

pub fn parse_message(f: &Field, text: &str) -> Result<Vec<Vec<Fe>>> {
    let (h, body) = tokenize(text)?;
    let k = header_usize(&h, "k")?;
    header_field(&h, f)?;
    if body.is_empty() {
        return Err(Error::EmptyMessage);
    }
    let rows = parse_rows(f, &body, k, false)?;
    Ok(rows
        .into_iter()
        .map(|r| r.into_iter().map(|s| s.value().expect("complete").clone()).collect())
        .collect())
}

pub fn write_mask(mask: &[Vec<bool>]) -> String {
    let n = mask.first().map_or(0, Vec::len);
    let mut out = format!("n={n}\n");
    for row in mask {
        let tokens: Vec<&str> = row.iter().map(|&e| if e { "*" } else { "." }).collect();
        out.push_str(&tokens.join(" "));
        out.push('\n');
    }
    out
}

/// Mask file: `*` erased, `.` received.
pub fn parse_mask(text: &str) -> Result<Vec<Vec<bool>>> {
    let (h, body) = tokenize(text)?;
    let n = header_usize(&h, "n")?;
    body.iter()
        .enumerate()
        .map(|(i, line)| {
            if line.len() != n {
                let (l, c) = line.first().map_or((i + 2, 1), |t| (t.line, t.column));
                return Err(Error::parse(l, c, format!("expected {n} marks, found {}", line.len())));
            }
            line.iter()
                .map(|t| match t.text {
                    "*" => Ok(true),
                    "." => Ok(false),
                    other => Err(Error::parse(t.line, t.column, format!("expected `*` or `.`, found `{other}`"))),
                })
                .collect()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::convcode::random_generator;
    use crate::example::{example_frame, example_mask};
    use proptest::prelude::*;

    #[test]
    fn example_spec_round_trips() {
        let spec = CodeSpec::example().unwrap();
        assert_eq!((spec.n, spec.k, spec.delta, spec.window), (5, 3, 2, Some(1)));
        let text = spec.to_text();
        let back = CodeSpec::parse(&text).unwrap();
        assert_eq!(back, spec);
        assert_eq!(back.to_text(), text);
        assert!(text.ends_with("}\n"));
    }

    #[test]
    fn spec_cross_validation() {
        let spec = CodeSpec::example().unwrap();
        let f = spec.field.clone();
        let mut other = spec.clone();
        other.generator = Some(random_generator(&f, 5, 3, &[1, 1, 0], &mut SplitMix64::new(8)).unwrap());
        assert!(matches!(CodeSpec::parse(&other.to_text()), Err(Error::Integrity(_))));
        let mut wrong_degree = spec.clone();
        wrong_degree.delta = 3;
        assert!(matches!(CodeSpec::parse(&wrong_degree.to_text()), Err(Error::Integrity(_))));
        let mut only_g = spec.clone();
        only_g.system = None;
        let parsed = CodeSpec::parse(&only_g.to_text()).unwrap();
        assert_eq!(parsed.system().unwrap().s(), 2);
    }

    #[test]
    fn small_field_spec_round_trips() {
        let f = Field::gf(3, 2).unwrap();
        let g = random_generator(&f, 3, 1, &[2], &mut SplitMix64::new(5)).unwrap();
        let spec = CodeSpec {
            field: f,
            n: 3,
            k: 1,
            delta: 2,
            generator: Some(g),
            system: None,
            delay: None,
            window: None,
        };
        let text = spec.to_text();
        assert_eq!(CodeSpec::parse(&text).unwrap().to_text(), text);
        assert!(!text.contains("system") && !text.contains("delay"));
    }

    #[test]
    fn json_errors_carry_position() {
        let err = CodeSpec::parse("{\n  \"n\": 5,\n  \"k\": oops\n}").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err:?}");
    }

    #[test]
    fn stream_files_round_trip() {
        let f = Field::example_field();
        let (_, word, stream) = example_frame(&f).unwrap();
        let text = write_stream(&f, &stream);
        assert_eq!(parse_stream(&f, &text).unwrap(), stream);
        assert_eq!(text.lines().next().unwrap(), "n=5 k=3 gamma=3 field=2^409");
        assert_eq!(text.lines().nth(1).unwrap().split(' ').take(2).collect::<Vec<_>>(), ["*", "*"]);
        let frame = write_frame(&f, 5, 3, 3, &word);
        assert_eq!(parse_frame(&f, &frame).unwrap(), ReceivedStream::clean(5, 3, 3, &word).unwrap());
        let err = parse_frame(&f, &text).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, column: 1, .. }), "{err:?}");
    }

    #[test]
    fn line_errors_carry_position() {
        let f = Field::gf(2, 4).unwrap();
        let err = parse_stream(&f, "n=2 k=1 gamma=0 field=2^4\n3 *\n1  zz\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, column: 4, .. }), "{err:?}");
        let err = parse_stream(&f, "n=2 k=1 gamma=0 field=2^4\n3 * 1\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, column: 1, .. }), "{err:?}");
        let err = parse_stream(&f, "n=2 k=1 gamma=0 field=2^5\n3 *\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }), "{err:?}");
        assert!(matches!(utf8(b"ok\n\xffx"), Err(Error::Parse { line: 2, column: 1, .. })));
    }

    #[test]
    fn messages_and_masks_round_trip() {
        let f = Field::gf(5, 1).unwrap();
        let message: Vec<Vec<Fe>> = (0..3).map(|t| (0..2).map(|c| f.from_u64(t + c)).collect()).collect();
        assert_eq!(parse_message(&f, &write_message(&f, &message)).unwrap(), message);
        let mask = example_mask();
        assert_eq!(parse_mask(&write_mask(&mask)).unwrap(), mask);
        assert!(matches!(parse_mask("n=2\n* x\n"), Err(Error::Parse { line: 2, column: 3, .. })));
    }

    proptest! {
        #[test]
        fn parsers_never_panic(bytes in proptest::collection::vec(any::<u8>(), 0..200)) {
            let f = Field::gf(2, 4).unwrap();
            if let Ok(text) = utf8(&bytes) {
                let _ = parse_stream(&f, text);
                let _ = parse_frame(&f, text);
                let _ = parse_message(&f, text);
                let _ = parse_mask(text);
                let _ = CodeSpec::parse(text);
            }
        }

        #[test]
        fn mutated_streams_never_panic(pos in 0usize..60, byte in any::<u8>()) {
            let f = Field::gf(2, 4).unwrap();
            let mut text = b"n=2 k=1 gamma=1 field=2^4\n3 *\n1 a\n0 0\n".to_vec();
            let p = pos % text.len();
            text[p] = byte;
            if let Ok(t) = utf8(&text) {
                let _ = parse_stream(&f, t);
            }
        }
    }
}
