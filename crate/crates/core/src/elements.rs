//! Standard atomic weights, kg/kmol.

/// Conventional atomic weights for the elements that show up in combustion
/// mechanisms. Lookup is case-insensitive (`AR` and `Ar` both resolve).
const TABLE: &[(&str, f64)] = &[
    ("H", 1.008),
    ("D", 2.014),
    ("He", 4.002602),
    ("C", 12.011),
    ("N", 14.007),
    ("O", 15.999),
    ("F", 18.998403163),
    ("Ne", 20.1797),
    ("S", 32.06),
    ("Cl", 35.45),
    ("Ar", 39.95),
    ("Kr", 83.798),
    ("Xe", 131.293),
];

pub fn standard_atomic_weight(symbol: &str) -> Option<f64> {
    TABLE
        .iter()
        .find(|(s, _)| s.eq_ignore_ascii_case(symbol))
        .map(|&(_, w)| w)
}
