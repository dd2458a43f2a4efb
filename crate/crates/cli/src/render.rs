//! Spacetime diagrams and amplitude dumps.

use std::fmt::Write as _;

use qca::{decode_config, ConfigIndex, LatticeSpec, QuantumState};

fn cell_char(state: u8, alphabet: u32) -> char {
    if alphabet == 2 {
        return if state == 0 { '.' } else { '#' };
    }
    char::from_digit(u32::from(state), 36).unwrap_or('?')
}

pub fn ascii_classical(rows: &[ConfigIndex], spec: &LatticeSpec) -> String {
    let mut out = String::new();
    for row in rows {
        let cells = decode_config(*row, spec).expect("trace stays in range");
        out.extend(cells.iter().map(|&c| cell_char(c, spec.alphabet())));
        out.push('\n');
    }
    out
}

pub fn ascii_quantum(states: &[QuantumState]) -> String {
    let mut out = String::new();
    for state in states {
        let row: Vec<String> = state
            .probabilities()
            .iter()
            .map(|p| format!("{p:.4}"))
            .collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out
}

/// Binary PGM (P5) with one 8-bit row per step.
pub fn pgm(width: usize, rows: &[Vec<u8>]) -> Vec<u8> {
    let mut out = format!("P5\n{width} {}\n255\n", rows.len()).into_bytes();
    for row in rows {
        debug_assert_eq!(row.len(), width);
        out.extend_from_slice(row);
    }
    out
}

/// Gray level `state * 255 / (s - 1)` per cell.
pub fn pgm_classical(rows: &[ConfigIndex], spec: &LatticeSpec) -> Vec<u8> {
    let top = spec.alphabet() - 1;
    let pixels: Vec<Vec<u8>> = rows
        .iter()
        .map(|r| {
            decode_config(*r, spec)
                .expect("trace stays in range")
                .iter()
                .map(|&c| (u32::from(c) * 255 / top) as u8)
                .collect()
        })
        .collect();
    pgm(spec.len(), &pixels)
}

/// Gray level `round(|amp|^2 * 255)` per configuration.
pub fn pgm_quantum(states: &[QuantumState]) -> Vec<u8> {
    let width = states.first().map_or(0, |s| s.amplitudes().len());
    let pixels: Vec<Vec<u8>> = states
        .iter()
        .map(|s| {
            s.probabilities()
                .iter()
                .map(|p| (p * 255.0).round().clamp(0.0, 255.0) as u8)
                .collect()
        })
        .collect();
    pgm(width, &pixels)
}

/// `step index re im` rows, each step preceded by a `# step t norm2 v` line.
pub fn amps(states: &[QuantumState]) -> String {
    let mut out = String::from("# step index re im\n");
    for (t, state) in states.iter().enumerate() {
        let _ = writeln!(out, "# step {t} norm2 {}", state.norm_sqr());
        for (i, a) in state.amplitudes().iter().enumerate() {
            let _ = writeln!(out, "{t} {i} {} {}", a.re, a.im);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use qca::quantum::basis_state;

    #[test]
    fn ascii_rows() {
        let spec = LatticeSpec::binary(4).unwrap();
        assert_eq!(ascii_classical(&[ConfigIndex(11), ConfigIndex(0)], &spec), "#.##\n....\n");
        let spec = LatticeSpec::new(3, 3).unwrap();
        assert_eq!(ascii_classical(&[ConfigIndex(7)], &spec), "021\n");
    }

    #[test]
    fn pgm_header_and_levels() {
        let spec = LatticeSpec::new(3, 3).unwrap();
        let img = pgm_classical(&[ConfigIndex(7), ConfigIndex(26)], &spec);
        let header = b"P5\n3 2\n255\n";
        assert_eq!(&img[..header.len()], header);
        assert_eq!(&img[header.len()..], &[0, 255, 127, 255, 255, 255]);
        let q = basis_state(ConfigIndex(2), &LatticeSpec::binary(3).unwrap()).unwrap();
        let img = pgm_quantum(&[q]);
        assert_eq!(&img[..11], b"P5\n8 1\n255\n");
        assert_eq!(&img[11..], &[0, 0, 255, 0, 0, 0, 0, 0]);
    }

    #[test]
    fn amps_layout() {
        let q = basis_state(ConfigIndex(1), &LatticeSpec::binary(3).unwrap()).unwrap();
        let text = amps(&[q]);
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines[1], "# step 0 norm2 1");
        assert_eq!(lines[2], "0 0 0 0");
        assert_eq!(lines[3], "0 1 1 0");
        assert_eq!(lines.len(), 2 + 8);
    }
}
