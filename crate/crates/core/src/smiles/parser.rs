use std::collections::BTreeMap;

use super::token::{parse_bracket, tokenize, Token, TokenKind};
use super::{ErrorClass, ParseError};
use crate::chem::{check_valence, Atom, Bond, BondOrder, Element, MolGraph};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum BondSymbol {
    Single,
    Double,
    Triple,
    Aromatic,
}

impl BondSymbol {
    fn from_text(text: &str) -> BondSymbol {
        match text {
            "=" => BondSymbol::Double,
            "#" => BondSymbol::Triple,
            ":" => BondSymbol::Aromatic,
            // '-', and the directional '/' '\' which carry no order information
            _ => BondSymbol::Single,
        }
    }

    fn order(self) -> BondOrder {
        match self {
            BondSymbol::Single => BondOrder::Single,
            BondSymbol::Double => BondOrder::Double,
            BondSymbol::Triple => BondOrder::Triple,
            BondSymbol::Aromatic => BondOrder::Aromatic,
        }
    }
}

struct OpenRing {
    atom: usize,
    bond: Option<BondSymbol>,
    position: usize,
}

/// Parse a SMILES string into a sanitized molecular graph.
pub fn parse(smiles: &str) -> Result<MolGraph, ParseError> {
    let graph = parse_unchecked(smiles)?;
    let violations = check_valence(&graph);
    if let Some(v) = violations.iter().find(|v| v.is_valence()) {
        return Err(ParseError::new(
            atom_position(smiles, v.atom),
            ErrorClass::BadValence,
            &format!("atom {} has an illegal valence ({:?})", v.atom, v.kind),
        ));
    }
    if let Some(v) = violations.first() {
        return Err(ParseError::new(
            atom_position(smiles, v.atom),
            ErrorClass::Other,
            &format!("atom {}: {:?}", v.atom, v.kind),
        ));
    }
    Ok(graph)
}

/// Parse the grammar and build the graph without valence checks.
pub fn parse_unchecked(smiles: &str) -> Result<MolGraph, ParseError> {
    let tokens = tokenize(smiles)?;
    if tokens.is_empty() {
        return Err(ParseError::new(0, ErrorClass::Other, "empty SMILES"));
    }
    check_parentheses(&tokens)?;

    let mut atoms: Vec<Atom> = Vec::new();
    let mut bonds: Vec<(usize, usize, BondOrder)> = Vec::new();
    let mut prev: Option<usize> = None;
    let mut pending: Option<(BondSymbol, usize)> = None;
    let mut branches: Vec<Option<usize>> = Vec::new();
    let mut rings: BTreeMap<u32, OpenRing> = BTreeMap::new();
    let mut last_kind: Option<TokenKind> = None;

    let other = |pos: usize, msg: &str| ParseError::new(pos, ErrorClass::Other, msg);

    for token in &tokens {
        let pos = token.position;
        match token.kind {
            TokenKind::Atom | TokenKind::BracketAtom => {
                let atom = build_atom(token)?;
                let index = atoms.len();
                let aromatic = atom.is_aromatic;
                atoms.push(atom);
                if let Some(p) = prev {
                    let order = match pending.take() {
                        Some((sym, _)) => sym.order(),
                        None => implicit_order(atoms[p].is_aromatic, aromatic),
                    };
                    bonds.push((p, index, order));
                } else if let Some((_, at)) = pending {
                    return Err(other(at, "bond without a preceding atom"));
                }
                prev = Some(index);
            }
            TokenKind::Bond => {
                if pending.is_some() {
                    return Err(other(pos, "two consecutive bond symbols"));
                }
                if prev.is_none() {
                    return Err(other(pos, "bond without a preceding atom"));
                }
                pending = Some((BondSymbol::from_text(&token.text), pos));
            }
            TokenKind::BranchOpen => {
                if prev.is_none() || last_kind == Some(TokenKind::BranchOpen) {
                    return Err(other(pos, "branch without an anchor atom"));
                }
                if pending.is_some() {
                    return Err(other(pos, "bond symbol before a branch"));
                }
                branches.push(prev);
            }
            TokenKind::BranchClose => {
                if last_kind == Some(TokenKind::BranchOpen) {
                    return Err(other(pos, "empty branch"));
                }
                if let Some((_, at)) = pending {
                    return Err(other(at, "dangling bond at branch end"));
                }
                // Balance was checked up front.
                prev = branches.pop().flatten();
            }
            TokenKind::RingBondDigit | TokenKind::RingBondTwoDigit => {
                let Some(current) = prev else {
                    return Err(other(pos, "ring bond without an atom"));
                };
                let digit: u32 = token.text.trim_start_matches('%').parse().unwrap_or(0);
                let symbol = pending.take().map(|(s, _)| s);
                match rings.remove(&digit) {
                    Some(open) => {
                        if open.atom == current {
                            return Err(other(pos, "ring bond closes on its own atom"));
                        }
                        let sym = match (open.bond, symbol) {
                            (Some(a), Some(b)) if a != b => {
                                return Err(other(pos, "conflicting ring bond symbols"))
                            }
                            (Some(a), _) => Some(a),
                            (None, b) => b,
                        };
                        let order = sym.map(BondSymbol::order).unwrap_or_else(|| {
                            implicit_order(atoms[open.atom].is_aromatic, atoms[current].is_aromatic)
                        });
                        bonds.push((open.atom, current, order));
                    }
                    None => {
                        rings.insert(
                            digit,
                            OpenRing {
                                atom: current,
                                bond: symbol,
                                position: pos,
                            },
                        );
                    }
                }
            }
            TokenKind::Dot => {
                if prev.is_none() {
                    return Err(other(pos, "`.` without a preceding fragment"));
                }
                if let Some((_, at)) = pending {
                    return Err(other(at, "dangling bond before `.`"));
                }
                prev = None;
            }
        }
        last_kind = Some(token.kind);
    }

    if let Some((_, at)) = pending {
        return Err(other(at, "dangling bond at end of string"));
    }
    if prev.is_none() {
        let at = tokens.last().map_or(0, |t| t.position);
        return Err(other(at, "string ends without an atom"));
    }
    if let Some(open) = rings.values().min_by_key(|r| r.position) {
        return Err(ParseError::new(
            open.position,
            ErrorClass::UnmatchedRingClosure,
            "ring bond opened but never closed",
        ));
    }

    build_graph(atoms, bonds).map_err(|e| other(0, &e.to_string()))
}

fn build_graph(
    atoms: Vec<Atom>,
    bonds: Vec<(usize, usize, BondOrder)>,
) -> Result<MolGraph, crate::chem::ChemError> {
    let list: Vec<Bond> = bonds.iter().map(|&(a, b, o)| Bond::new(a, b, o)).collect();
    let graph = MolGraph::new(atoms, list)?;
    // Aromatic bonds outside rings (biphenyl-style links) are single bonds.
    if graph
        .bonds()
        .iter()
        .any(|b| b.order == BondOrder::Aromatic && !b.in_ring)
    {
        let (atoms, bonds) = graph.into_parts();
        let fixed = bonds
            .into_iter()
            .map(|b| {
                let order = if b.order == BondOrder::Aromatic && !b.in_ring {
                    BondOrder::Single
                } else {
                    b.order
                };
                Bond::new(b.begin, b.end, order)
            })
            .collect();
        return MolGraph::new(atoms, fixed);
    }
    Ok(graph)
}

fn implicit_order(a_aromatic: bool, b_aromatic: bool) -> BondOrder {
    if a_aromatic && b_aromatic {
        BondOrder::Aromatic
    } else {
        BondOrder::Single
    }
}

fn build_atom(token: &Token) -> Result<Atom, ParseError> {
    let unsupported = |symbol: &str| {
        ParseError::new(
            token.position,
            ErrorClass::Other,
            &format!("unsupported element `{symbol}`"),
        )
    };
    if token.kind == TokenKind::Atom {
        let aromatic = token.text.chars().next().is_some_and(|c| c.is_ascii_lowercase());
        let symbol = if aromatic {
            token.text.to_ascii_uppercase()
        } else {
            token.text.clone()
        };
        let element = Element::from_symbol(&symbol).map_err(|_| unsupported(&symbol))?;
        return Ok(Atom::organic(element, aromatic));
    }
    let body = &token.text[1..token.text.len() - 1];
    let bracket = parse_bracket(body, token.position + 1)?;
    let element = Element::from_symbol(&bracket.symbol).map_err(|_| unsupported(&bracket.symbol))?;
    if bracket.aromatic && !element.can_be_aromatic() {
        return Err(unsupported(&bracket.symbol));
    }
    if !(-2..=2).contains(&bracket.charge) {
        return Err(ParseError::new(
            token.position,
            ErrorClass::Other,
            "formal charge outside [-2, 2]",
        ));
    }
    Ok(Atom {
        element,
        formal_charge: bracket.charge,
        is_aromatic: bracket.aromatic,
        explicit_h: bracket.hydrogens,
        isotope: bracket.isotope,
        implicit_h: false,
    })
}

/// Unbalanced parentheses are reported before anything else so that a
/// truncated string is classified by its most visible defect.
fn check_parentheses(tokens: &[Token]) -> Result<(), ParseError> {
    let mut open: Vec<usize> = Vec::new();
    for t in tokens {
        match t.kind {
            TokenKind::BranchOpen => open.push(t.position),
            TokenKind::BranchClose if open.pop().is_none() => {
                return Err(ParseError::new(
                    t.position,
                    ErrorClass::UnclosedParenthesis,
                    "`)` without a matching `(`",
                ));
            }
            _ => {}
        }
    }
    match open.first() {
        Some(&pos) => Err(ParseError::new(
            pos,
            ErrorClass::UnclosedParenthesis,
            "`(` is never closed",
        )),
        None => Ok(()),
    }
}

/// Character offset of the n-th atom token, for error reporting.
fn atom_position(smiles: &str, atom: usize) -> usize {
    tokenize(smiles)
        .ok()
        .and_then(|tokens| {
            tokens
                .into_iter()
                .filter(|t| matches!(t.kind, TokenKind::Atom | TokenKind::BracketAtom))
                .nth(atom)
                .map(|t| t.position)
        })
        .unwrap_or(0)
}
