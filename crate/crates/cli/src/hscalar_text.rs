//! Parser for the textual scalar rendering "a+bi+cp+dip" / "a+bh", the
//! inverse of the library's Display output.

use anyhow::{anyhow, bail, Result};
use pmech_core::HScalar;

/// Split "1.5-2e-3i+0p+1ip" into signed component strings; a sign starts a
/// new component unless it follows an exponent marker.
fn components(s: &str) -> Vec<String> {
    let mut parts = Vec::new();
    let mut cur = String::new();
    let mut prev: Option<char> = None;
    for ch in s.chars() {
        if (ch == '+' || ch == '-') && !matches!(prev, Some('e') | Some('E')) && !cur.is_empty() {
            parts.push(cur.clone());
            cur.clear();
        }
        if !ch.is_whitespace() {
            cur.push(ch);
        }
        prev = Some(ch);
    }
    if !cur.is_empty() {
        parts.push(cur);
    }
    parts
}

/// Parse a scalar rendered by the library: the four-component form over
/// {1, i, p, ip} or the double form "a+bh".
pub fn parse_hscalar(text: &str) -> Result<HScalar> {
    let text = text.trim();
    if text.is_empty() {
        bail!("empty scalar");
    }
    let mut re = 0.0;
    let mut im_i = 0.0;
    let mut im_p = 0.0;
    let mut im_ip = 0.0;
    let mut im_h: Option<f64> = None;
    for part in components(text) {
        let (num, unit) = if let Some(n) = part.strip_suffix("ip") {
            (n, "ip")
        } else if let Some(n) = part.strip_suffix('i') {
            (n, "i")
        } else if let Some(n) = part.strip_suffix('p') {
            (n, "p")
        } else if let Some(n) = part.strip_suffix('h') {
            (n, "h")
        } else {
            (part.as_str(), "")
        };
        let num = match num {
            "" | "+" => "1",
            "-" => "-1",
            other => other,
        };
        let v: f64 = num.parse().map_err(|e| anyhow!("bad number '{num}' in '{text}': {e}"))?;
        match unit {
            "" => re += v,
            "i" => im_i += v,
            "p" => im_p += v,
            "ip" => im_ip += v,
            "h" => *im_h.get_or_insert(0.0) += v,
            _ => unreachable!(),
        }
    }
    if let Some(h) = im_h {
        if im_i != 0.0 || im_p != 0.0 || im_ip != 0.0 {
            bail!("'{text}' mixes the double unit h with i or p");
        }
        return Ok(HScalar::double(re, h));
    }
    Ok(HScalar::c4(re, im_i, im_p, im_ip))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_display() {
        let values = [
            HScalar::c4(1.5, -2.25, 0.0, 7.125),
            HScalar::real(-3.0),
            HScalar::dual(0.5, 1e-3),
            HScalar::complex(0.1, -0.2),
            HScalar::double(2.0, -0.75),
            HScalar::double(0.0, 1.0),
        ];
        for v in values {
            let text = format!("{v}");
            let back = parse_hscalar(&text).unwrap();
            assert_eq!(back, v, "roundtrip of '{text}'");
        }
    }

    #[test]
    fn bare_units_and_errors() {
        assert_eq!(parse_hscalar("i").unwrap(), HScalar::complex(0.0, 1.0));
        assert_eq!(parse_hscalar("2-h").unwrap(), HScalar::double(2.0, -1.0));
        assert_eq!(parse_hscalar("1e-3+2e-4p").unwrap(), HScalar::dual(1e-3, 2e-4));
        assert!(parse_hscalar("1+h+i").is_err());
        assert!(parse_hscalar("wat").is_err());
    }
}
