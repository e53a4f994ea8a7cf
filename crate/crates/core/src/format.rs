//! Number formatting shared by CSV and text output.

/// 17 significant digits, round-trip exact.
pub fn full(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        format!("{x}")
    }
}

/// 12 significant digits, fixed notation for moderate magnitudes, trailing zeros trimmed.
pub fn short(x: f64) -> String {
    if !x.is_finite() {
        return format!("{x}");
    }
    if x == 0.0 {
        return "0".into();
    }
    let exp = x.abs().log10().floor() as i32;
    if (-5..12).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
        let s = format!("{x:.decimals$}");
        let s = if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        };
        if s == "-0" { "0".into() } else { s }
    } else {
        let s = format!("{x:.11e}");
        let (mant, e) = s.split_once('e').expect("exponent form");
        let mant = if mant.contains('.') {
            mant.trim_end_matches('0').trim_end_matches('.')
        } else {
            mant
        };
        format!("{mant}e{e}")
    }
}

pub fn short_vec(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| short(*x)).collect();
    format!("({})", parts.join(", "))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_round_trips() {
        for x in [0.1, 1.0 / 3.0, -2.5e-300, 1e300, std::f64::consts::PI] {
            assert_eq!(full(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn short_forms() {
        assert_eq!(short(1.0 - 2f64.sqrt()), "-0.414213562373");
        assert_eq!(short(4.0), "4");
        assert_eq!(short(0.5), "0.5");
        assert_eq!(short(1.5e-9), "1.5e-9");
        assert_eq!(short(-0.0), "0");
        assert_eq!(short_vec(&[1.0, -0.25]), "(1, -0.25)");
    }
}
