//! SMILES reading, canonical writing and validation.

mod parser;
mod token;
mod writer;

use std::fmt;

pub use parser::{parse, parse_unchecked};
pub use token::{tokenize, Token, TokenKind};
pub use writer::{write_canonical, write_ranked};

use crate::chem::check_valence;

/// Failure categories reported for malformed SMILES.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ErrorClass {
    UnclosedParenthesis,
    UnmatchedRingClosure,
    BadValence,
    Lexical,
    Other,
}

impl ErrorClass {
    pub const ALL: [ErrorClass; 5] = [
        ErrorClass::UnclosedParenthesis,
        ErrorClass::UnmatchedRingClosure,
        ErrorClass::BadValence,
        ErrorClass::Lexical,
        ErrorClass::Other,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ErrorClass::UnclosedParenthesis => "unclosed_parenthesis",
            ErrorClass::UnmatchedRingClosure => "unmatched_ring_closure",
            ErrorClass::BadValence => "bad_valence",
            ErrorClass::Lexical => "lexical",
            ErrorClass::Other => "other",
        }
    }
}

impl fmt::Display for ErrorClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{class} at {position}: {message}")]
pub struct ParseError {
    pub position: usize,
    pub class: ErrorClass,
    pub message: String,
}

impl ParseError {
    pub fn new(position: usize, class: ErrorClass, message: &str) -> ParseError {
        ParseError {
            position,
            class,
            message: message.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Validity {
    Valid,
    Invalid(ParseError),
}

impl Validity {
    pub fn is_valid(&self) -> bool {
        matches!(self, Validity::Valid)
    }
}

/// Valid iff the string parses and the graph has no valence or aromaticity
/// violations. Never fails.
pub fn validate(smiles: &str) -> Validity {
    match parse(smiles) {
        Ok(g) if check_valence(&g).is_empty() => Validity::Valid,
        Ok(_) => Validity::Invalid(ParseError::new(0, ErrorClass::BadValence, "valence")),
        Err(e) => Validity::Invalid(e),
    }
}

/// Parse and rewrite in canonical form.
pub fn canonicalize(smiles: &str) -> Result<String, ParseError> {
    parse(smiles).map(|g| write_canonical(&g))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validate_examples() {
        assert!(validate("CC(=O)O").is_valid());
        assert_eq!(
            validate("C((("),
            Validity::Invalid(ParseError::new(
                1,
                ErrorClass::UnclosedParenthesis,
                "`(` is never closed"
            ))
        );
        assert!(!validate("").is_valid());
    }
}
