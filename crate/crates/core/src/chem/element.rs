use std::fmt;

use super::ChemError;

/// Elements the toolkit understands: the SMILES organic subset plus
/// explicit hydrogen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Element {
    H,
    B,
    C,
    N,
    O,
    F,
    P,
    S,
    Cl,
    Br,
    I,
}

impl Element {
    pub const ALL: [Element; 11] = [
        Element::H,
        Element::B,
        Element::C,
        Element::N,
        Element::O,
        Element::F,
        Element::P,
        Element::S,
        Element::Cl,
        Element::Br,
        Element::I,
    ];

    pub fn from_symbol(symbol: &str) -> Result<Element, ChemError> {
        Ok(match symbol {
            "H" => Element::H,
            "B" => Element::B,
            "C" => Element::C,
            "N" => Element::N,
            "O" => Element::O,
            "F" => Element::F,
            "P" => Element::P,
            "S" => Element::S,
            "Cl" => Element::Cl,
            "Br" => Element::Br,
            "I" => Element::I,
            other => return Err(ChemError::UnsupportedElement(other.to_string())),
        })
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Element::H => "H",
            Element::B => "B",
            Element::C => "C",
            Element::N => "N",
            Element::O => "O",
            Element::F => "F",
            Element::P => "P",
            Element::S => "S",
            Element::Cl => "Cl",
            Element::Br => "Br",
            Element::I => "I",
        }
    }

    pub fn atomic_number(self) -> u8 {
        match self {
            Element::H => 1,
            Element::B => 5,
            Element::C => 6,
            Element::N => 7,
            Element::O => 8,
            Element::F => 9,
            Element::P => 15,
            Element::S => 16,
            Element::Cl => 17,
            Element::Br => 35,
            Element::I => 53,
        }
    }

    /// Standard atomic weight in g/mol.
    pub fn mass(self) -> f64 {
        match self {
            Element::H => 1.008,
            Element::B => 10.81,
            Element::C => 12.011,
            Element::N => 14.007,
            Element::O => 15.999,
            Element::F => 18.998,
            Element::P => 30.974,
            Element::S => 32.06,
            Element::Cl => 35.45,
            Element::Br => 79.904,
            Element::I => 126.904,
        }
    }

    /// True for elements that may be written without brackets.
    pub fn is_organic_subset(self) -> bool {
        !matches!(self, Element::H)
    }

    /// True for elements that have a lowercase aromatic SMILES form.
    pub fn can_be_aromatic(self) -> bool {
        matches!(
            self,
            Element::B | Element::C | Element::N | Element::O | Element::P | Element::S
        )
    }

    pub fn is_halogen(self) -> bool {
        matches!(self, Element::F | Element::Cl | Element::Br | Element::I)
    }

    /// Allowed valences for this element at the given formal charge, in
    /// ascending order. An empty slice means no legal valence exists.
    pub fn valences(self, charge: i8) -> &'static [u8] {
        use Element::*;
        match (self, charge) {
            (H, 0) => &[1],
            (H, 1) | (H, -1) => &[0],
            (B, 0) => &[3],
            (B, -1) => &[4],
            (B, 1) => &[2],
            (C, 0) => &[4],
            (C, 1) | (C, -1) => &[3],
            (N, 0) => &[3],
            (N, 1) => &[4],
            (N, -1) => &[2],
            (N, -2) => &[1],
            (O, 0) => &[2],
            (O, 1) => &[3],
            (O, -1) => &[1],
            (O, -2) => &[0],
            (P, 0) => &[3, 5],
            (P, 1) => &[4],
            (P, -1) => &[2],
            (S, 0) => &[2, 4, 6],
            (S, 1) => &[3, 5],
            (S, -1) => &[1, 3, 5],
            (S, -2) => &[0],
            (F | Cl | Br | I, 0) => &[1],
            (F | Cl | Br | I, -1) => &[0],
            (F | Cl | Br | I, 1) => &[2],
            _ => &[],
        }
    }
}

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symbols_round_trip() {
        for e in Element::ALL {
            assert_eq!(Element::from_symbol(e.symbol()).unwrap(), e);
        }
        assert!(matches!(
            Element::from_symbol("Na"),
            Err(ChemError::UnsupportedElement(_))
        ));
    }

    #[test]
    fn charged_nitrogen_gains_a_valence() {
        assert_eq!(Element::N.valences(0), &[3]);
        assert_eq!(Element::N.valences(1), &[4]);
        assert_eq!(Element::O.valences(1), &[3]);
    }
}
