use super::{ErrorClass, ParseError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TokenKind {
    Atom,
    BracketAtom,
    Bond,
    BranchOpen,
    BranchClose,
    RingBondDigit,
    RingBondTwoDigit,
    Dot,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    pub text: String,
    /// Character offset of the first character.
    pub position: usize,
}

/// Split a SMILES string into tokens. Concatenating the token texts gives
/// back the input exactly.
pub fn tokenize(smiles: &str) -> Result<Vec<Token>, ParseError> {
    let chars: Vec<char> = smiles.chars().collect();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let start = i;
        let kind = match c {
            'C' if chars.get(i + 1) == Some(&'l') => {
                i += 2;
                TokenKind::Atom
            }
            'B' if chars.get(i + 1) == Some(&'r') => {
                i += 2;
                TokenKind::Atom
            }
            'B' | 'C' | 'N' | 'O' | 'P' | 'S' | 'F' | 'I' | 'b' | 'c' | 'n' | 'o' | 'p' | 's' => {
                i += 1;
                TokenKind::Atom
            }
            '[' => {
                let close = chars[i..]
                    .iter()
                    .position(|&x| x == ']')
                    .ok_or_else(|| lexical(i, "unterminated bracket atom"))?;
                let body: String = chars[i + 1..i + close].iter().collect();
                parse_bracket(&body, i + 1)?;
                i += close + 1;
                TokenKind::BracketAtom
            }
            '-' | '=' | '#' | ':' | '/' | '\\' => {
                i += 1;
                TokenKind::Bond
            }
            '(' => {
                i += 1;
                TokenKind::BranchOpen
            }
            ')' => {
                i += 1;
                TokenKind::BranchClose
            }
            '0'..='9' => {
                i += 1;
                TokenKind::RingBondDigit
            }
            '%' => {
                let ok = chars.get(i + 1).is_some_and(char::is_ascii_digit)
                    && chars.get(i + 2).is_some_and(char::is_ascii_digit);
                if !ok {
                    return Err(lexical(i, "`%` must be followed by two digits"));
                }
                i += 3;
                TokenKind::RingBondTwoDigit
            }
            '.' => {
                i += 1;
                TokenKind::Dot
            }
            other => return Err(lexical(i, &format!("unexpected character `{other}`"))),
        };
        tokens.push(Token {
            kind,
            text: chars[start..i].iter().collect(),
            position: start,
        });
    }
    Ok(tokens)
}

fn lexical(position: usize, message: &str) -> ParseError {
    ParseError::new(position, ErrorClass::Lexical, message)
}

/// Contents of a bracket atom.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct BracketAtom {
    pub isotope: Option<u16>,
    pub symbol: String,
    pub aromatic: bool,
    pub hydrogens: u8,
    pub charge: i8,
}

/// Parse the text between `[` and `]`: isotope, symbol, chirality (ignored),
/// hydrogen count, charge and atom class (ignored).
pub(crate) fn parse_bracket(body: &str, offset: usize) -> Result<BracketAtom, ParseError> {
    let chars: Vec<char> = body.chars().collect();
    let mut i = 0;
    let err = |at: usize, msg: &str| lexical(offset + at, msg);

    let digits_start = i;
    while i < chars.len() && chars[i].is_ascii_digit() {
        i += 1;
    }
    let isotope = if i > digits_start {
        let text: String = chars[digits_start..i].iter().collect();
        Some(text.parse().map_err(|_| err(digits_start, "isotope out of range"))?)
    } else {
        None
    };

    let (symbol, aromatic) = match chars.get(i) {
        Some(c) if c.is_ascii_uppercase() => {
            let mut s = c.to_string();
            i += 1;
            if let Some(&l) = chars.get(i) {
                if l.is_ascii_lowercase() {
                    s.push(l);
                    i += 1;
                }
            }
            (s, false)
        }
        Some(c) if c.is_ascii_lowercase() => {
            let mut s = c.to_ascii_uppercase().to_string();
            i += 1;
            // two-letter aromatic symbols (se, as)
            if let Some(&l) = chars.get(i) {
                if (*c == 's' && l == 'e') || (*c == 'a' && l == 's') {
                    s.push(l);
                    i += 1;
                }
            }
            (s, true)
        }
        _ => return Err(err(i, "bracket atom needs an element symbol")),
    };

    // Chirality is accepted and ignored.
    let chiral_start = i;
    while chars.get(i) == Some(&'@') {
        i += 1;
    }
    if i > chiral_start && i < chars.len() && chars[i].is_ascii_uppercase() && chars[i] != 'H' {
        // @TH1, @AL2 and friends
        while i < chars.len() && (chars[i].is_ascii_uppercase() || chars[i].is_ascii_digit()) {
            if chars[i] == 'H' {
                break;
            }
            i += 1;
        }
    }

    let mut hydrogens = 0u8;
    if chars.get(i) == Some(&'H') {
        i += 1;
        hydrogens = 1;
        if let Some(d) = chars.get(i).and_then(|c| c.to_digit(10)) {
            hydrogens = d as u8;
            i += 1;
        }
    }

    let mut charge = 0i8;
    if let Some(&sign) = chars.get(i).filter(|c| **c == '+' || **c == '-') {
        let unit: i8 = if sign == '+' { 1 } else { -1 };
        i += 1;
        if let Some(d) = chars.get(i).and_then(|c| c.to_digit(10)) {
            charge = unit * d as i8;
            i += 1;
        } else {
            charge = unit;
            while chars.get(i) == Some(&sign) {
                charge += unit;
                i += 1;
            }
        }
    }

    if chars.get(i) == Some(&':') {
        i += 1;
        let start = i;
        while i < chars.len() && chars[i].is_ascii_digit() {
            i += 1;
        }
        if i == start {
            return Err(err(i, "atom class needs digits"));
        }
    }

    if i != chars.len() {
        return Err(err(i, "unexpected character in bracket atom"));
    }
    Ok(BracketAtom {
        isotope,
        symbol,
        aromatic,
        hydrogens,
        charge,
    })
}
