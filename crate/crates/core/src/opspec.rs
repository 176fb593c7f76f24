//! Plain-text operators and elimination problems.
//!
//! A term line is a complex coefficient followed by single-site factors:
//!
//! ```text
//! 0.5 0:z 1:x          # 0.5 σᶻ₀ σˣ₁
//! 0 -1 2:+             # −i σ⁺₂
//! 1 |-><+|@0 1:+       # |−⟩⟨+|₀ σ⁺₁
//! 1 |psi+><psi-|@0,1   # two-site ket-bra
//! ```
//!
//! Axes are `x y z + - i`. Ket-bra labels are strings of `u d + -`, one
//! character per site, or `psi+ psi- phi+ phi-` on two sites. A coefficient
//! is `re` or `re im`. Factors on the same site multiply left to right.
//!
//! A problem file sets `sites` and `auxiliary` and fills sections:
//!
//! ```text
//! sites = 2
//! auxiliary = 1
//! [hg]            ground hamiltonian
//! [he]            excited hamiltonian
//! [coupling]      V⁺ = P H (1 − P) with P the excited projector
//! [jump rate=γ]   √γ × operator
//! ```
//!
//! The `k`-th `[coupling]` pairs with the `k`-th `[jump]`; a single
//! coupling is shared by every jump. `P = 1 − ⊗_aux |↓⟩⟨↓|`.

use nalgebra::DVector;
use num_complex::Complex64 as C64;

use crate::effective::EliminationProblem;
use crate::error::{Error, Result};
use crate::operator::{
    basis_ket, bell_state, embed, kron_all, pauli, BellSign, ComplexOperator, Pauli, MAX_SPINS,
};

fn perr(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

fn single_ket(label: char) -> Option<DVector<C64>> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    Some(match label {
        'u' => basis_ket(1, 0),
        'd' => basis_ket(1, 1),
        '+' => DVector::from_vec(vec![C64::new(s, 0.0), C64::new(s, 0.0)]),
        '-' => DVector::from_vec(vec![C64::new(s, 0.0), C64::new(-s, 0.0)]),
        _ => return None,
    })
}

/// Ket for a label on `sites` spins.
fn ket(label: &str, sites: usize, line: usize) -> Result<DVector<C64>> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let bell = |sign| bell_state(sign);
    let phi = |sign: f64| {
        let mut v = DVector::zeros(4);
        v[0] = C64::new(s, 0.0);
        v[3] = C64::new(sign * s, 0.0);
        v
    };
    let v = match label {
        "psi+" => bell(BellSign::Plus),
        "psi-" => bell(BellSign::Minus),
        "phi+" => phi(1.0),
        "phi-" => phi(-1.0),
        _ => {
            let mut v = DVector::from_element(1, C64::new(1.0, 0.0));
            for ch in label.chars() {
                let k = single_ket(ch).ok_or_else(|| perr(line, format!("unknown ket label '{ch}' in '{label}'")))?;
                v = v.kronecker(&k);
            }
            v
        }
    };
    if v.len() != 1 << sites {
        return Err(perr(line, format!("label '{label}' does not fit {sites} site(s)")));
    }
    Ok(v)
}

fn parse_site(tok: &str, spins: usize, line: usize) -> Result<usize> {
    let site: usize = tok.trim().parse().map_err(|_| perr(line, format!("bad site index '{tok}'")))?;
    if site >= spins {
        return Err(perr(line, format!("site {site} outside 0..{spins}")));
    }
    Ok(site)
}

/// One factor: `site:axis` or `|ket><bra|@s0,s1,…`.
fn parse_factor(tok: &str, spins: usize, line: usize) -> Result<ComplexOperator> {
    if let Some(rest) = tok.strip_prefix('|') {
        let (kb, sites) = rest.split_once('@').ok_or_else(|| perr(line, format!("ket-bra '{tok}' needs '@sites'")))?;
        let (k, b) = kb
            .strip_suffix('|')
            .and_then(|s| s.split_once("><"))
            .ok_or_else(|| perr(line, format!("malformed ket-bra '{tok}'")))?;
        let sites: Vec<usize> = sites.split(',').map(|s| parse_site(s, spins, line)).collect::<Result<_>>()?;
        let local = ComplexOperator::ket_bra(&ket(k, sites.len(), line)?, &ket(b, sites.len(), line)?)?;
        return embed(&local, &sites, spins).map_err(|e| perr(line, e.to_string()));
    }
    let (site, axis) = tok.split_once(':').ok_or_else(|| perr(line, format!("expected site:axis, got '{tok}'")))?;
    let site = parse_site(site, spins, line)?;
    let axis = Pauli::parse(axis).ok_or_else(|| perr(line, format!("unknown axis '{axis}'")))?;
    embed(&pauli(axis), &[site], spins)
}

fn is_number(tok: &str) -> bool {
    tok.parse::<f64>().is_ok()
}

/// Parses one term line into an operator on `spins` sites.
pub fn parse_term(text: &str, spins: usize, line: usize) -> Result<ComplexOperator> {
    let toks: Vec<&str> = text.split_whitespace().collect();
    let re: f64 = toks
        .first()
        .and_then(|t| t.parse().ok())
        .ok_or_else(|| perr(line, format!("term must start with a coefficient: '{text}'")))?;
    let (im, rest) = match toks.get(1) {
        Some(t) if is_number(t) => (t.parse().unwrap(), &toks[2..]),
        _ => (0.0, &toks[1..]),
    };
    let mut op = ComplexOperator::identity(spins);
    for tok in rest {
        op = &op * &parse_factor(tok, spins, line)?;
    }
    Ok(op.scale(C64::new(re, im)))
}

/// Sum of term lines; blank lines and `#` comments are skipped.
pub fn parse_operator(text: &str, spins: usize) -> Result<ComplexOperator> {
    let mut op = ComplexOperator::zeros(spins);
    for (i, raw) in text.lines().enumerate() {
        let body = strip_comment(raw);
        if !body.is_empty() {
            op = &op + &parse_term(body, spins, i + 1)?;
        }
    }
    Ok(op)
}

fn strip_comment(raw: &str) -> &str {
    raw.split('#').next().unwrap_or("").trim()
}

#[derive(Clone, Debug)]
enum Section {
    Ground,
    Excited,
    Coupling,
    Jump(f64),
}

/// Reads a problem file into an elimination problem.
pub fn parse_problem(text: &str) -> Result<EliminationProblem> {
    let mut spins: Option<usize> = None;
    let mut auxiliary: Option<Vec<usize>> = None;
    // (section, header line, term lines)
    let mut sections: Vec<(Section, usize, Vec<(usize, String)>)> = Vec::new();

    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = strip_comment(raw);
        if body.is_empty() {
            continue;
        }
        if let Some(head) = body.strip_prefix('[') {
            let head = head.strip_suffix(']').ok_or_else(|| perr(line, "unterminated section header"))?;
            let mut parts = head.split_whitespace();
            let sec = match parts.next() {
                Some("hg") => Section::Ground,
                Some("he") => Section::Excited,
                Some("coupling") => Section::Coupling,
                Some("jump") => {
                    let mut rate = 1.0;
                    for p in parts.by_ref() {
                        let v = p.strip_prefix("rate=").ok_or_else(|| perr(line, format!("unknown jump option '{p}'")))?;
                        rate = v.parse().map_err(|_| perr(line, format!("bad rate '{v}'")))?;
                        if !(rate >= 0.0) {
                            return Err(perr(line, format!("negative rate {rate}")));
                        }
                    }
                    Section::Jump(rate)
                }
                other => return Err(perr(line, format!("unknown section '{}'", other.unwrap_or("")))),
            };
            if let Some(extra) = parts.next() {
                return Err(perr(line, format!("unexpected '{extra}' in section header")));
            }
            sections.push((sec, line, Vec::new()));
            continue;
        }
        if let Some((_, _, terms)) = sections.last_mut() {
            terms.push((line, body.to_string()));
            continue;
        }
        let (key, value) = body.split_once('=').ok_or_else(|| perr(line, format!("expected 'key = value', got '{body}'")))?;
        match key.trim() {
            "sites" => {
                let n: usize = value.trim().parse().map_err(|_| perr(line, format!("bad site count '{}'", value.trim())))?;
                if n == 0 || n > MAX_SPINS {
                    return Err(perr(line, format!("site count must be in 1..={MAX_SPINS}")));
                }
                spins = Some(n);
            }
            "auxiliary" | "excited" => {
                let n = spins.ok_or_else(|| perr(line, "'sites' must come before 'auxiliary'"))?;
                auxiliary = Some(value.split(',').map(|s| parse_site(s, n, line)).collect::<Result<_>>()?);
            }
            other => return Err(perr(line, format!("unknown key '{other}'"))),
        }
    }

    let n = spins.ok_or_else(|| perr(0, "missing 'sites'"))?;
    let aux = auxiliary.ok_or_else(|| perr(0, "missing 'auxiliary'"))?;
    if aux.is_empty() {
        return Err(perr(0, "at least one auxiliary site is required"));
    }
    let down = ComplexOperator::basis_projector(1, 1);
    let ground_projector = kron_all(std::iter::repeat_n(&down, aux.len()))?;
    let ground_projector = embed(&ground_projector, &aux, n)?;
    let projector = &ComplexOperator::identity(n) - &ground_projector;

    let build = |terms: &[(usize, String)]| -> Result<ComplexOperator> {
        let mut op = ComplexOperator::zeros(n);
        for (line, t) in terms {
            op = &op + &parse_term(t, n, *line)?;
        }
        Ok(op)
    };
    let hermitian = |terms: &[(usize, String)], header: usize, what: &str| -> Result<ComplexOperator> {
        let op = build(terms)?;
        if !op.is_hermitian(1e-10) {
            return Err(perr(header, format!("{what} is not hermitian (defect {:e})", op.hermiticity_defect())));
        }
        Ok(op)
    };

    let mut hg = ComplexOperator::zeros(n);
    let mut he = ComplexOperator::zeros(n);
    let mut couplings = Vec::new();
    let mut jumps = Vec::new();
    for (sec, header, terms) in &sections {
        match sec {
            Section::Ground => hg = &hg + &hermitian(terms, *header, "[hg]")?,
            Section::Excited => he = &he + &hermitian(terms, *header, "[he]")?,
            Section::Coupling => {
                let h = build(terms)?;
                couplings.push((*header, &(&projector * &h) * &ground_projector));
            }
            Section::Jump(rate) => jumps.push(build(terms)?.scale_re(rate.sqrt())),
        }
    }
    let excitations = match couplings.len() {
        0 => vec![ComplexOperator::zeros(n); jumps.len()],
        1 => vec![couplings[0].1.clone(); jumps.len()],
        k if k == jumps.len() => couplings.into_iter().map(|(_, v)| v).collect(),
        k => {
            return Err(perr(couplings[k - 1].0, format!("{k} [coupling] sections for {} [jump] sections", jumps.len())))
        }
    };
    EliminationProblem::hermitian_pair(hg, he, excitations, jumps, projector, aux)
}

const LABELS: [char; 4] = ['I', 'X', 'Y', 'Z'];

/// Nonzero Pauli-string coefficients, `"XZ"` meaning `σˣ₀ σᶻ₁`.
pub fn pauli_expansion(op: &ComplexOperator, tol: f64) -> Vec<(String, C64)> {
    let n = op.spins();
    let basis = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z].map(pauli);
    let norm = (1u64 << n) as f64;
    let mut out = Vec::new();
    for code in 0..(1usize << (2 * n)) {
        let digits: Vec<usize> = (0..n).map(|s| (code >> (2 * (n - 1 - s))) & 3).collect();
        let string = kron_all(digits.iter().map(|&d| &basis[d])).expect("at most MAX_SPINS factors");
        let coeff = (&string * op).trace() / norm;
        if coeff.norm() > tol {
            out.push((digits.iter().map(|&d| LABELS[d]).collect(), coeff));
        }
    }
    out
}

fn fmt_complex(z: C64) -> String {
    let clean = |v: f64| if v.abs() < 1e-15 { 0.0 } else { v };
    let (re, im) = (clean(z.re), clean(z.im));
    match (re != 0.0, im != 0.0) {
        (_, false) => format!("{re:.6}"),
        (false, true) => format!("{im:.6}i"),
        (true, true) => format!("({re:.6}{im:+.6}i)"),
    }
}

/// `c · σσσ + …` on one line; `0` for the zero operator.
pub fn format_pauli(op: &ComplexOperator, tol: f64) -> String {
    let terms = pauli_expansion(op, tol);
    if terms.is_empty() {
        return "0".into();
    }
    terms.iter().map(|(s, c)| format!("{} {s}", fmt_complex(*c))).collect::<Vec<_>>().join(" + ")
}

/// Row-per-line dense matrix.
pub fn format_matrix(op: &ComplexOperator) -> String {
    let m = op.matrix();
    (0..m.nrows())
        .map(|r| (0..m.ncols()).map(|c| format!("{:>22}", fmt_complex(m[(r, c)]))).collect::<String>())
        .collect::<Vec<_>>()
        .join("\n")
}
