//! Text format for mechanisms. See `docs/mechanism-format.md` for the grammar.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use skeletal_core::mechanism::{Element, SpeciesInput};
use skeletal_core::{Arrhenius, Mechanism, MechanismError, Nasa7, Reaction, ReactionKind, SourceTag};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseError {
    #[error("line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("line {line}: reaction R{reaction} does not balance element {element} ({reactants} vs {products} atoms)")]
    Unbalanced {
        line: usize,
        reaction: usize,
        element: String,
        reactants: u32,
        products: u32,
    },
    #[error("line {line}, column {column}: unknown species {name}")]
    UnknownSpecies {
        line: usize,
        column: usize,
        name: String,
    },
    #[error("line {line}: duplicate species {name}")]
    DuplicateSpecies { line: usize, name: String },
    #[error("line {line}: unsupported reaction kind {kind} (only elementary, three-body and Lindemann falloff)")]
    UnsupportedKind { line: usize, kind: String },
    #[error("line {line}: {message}")]
    Invalid { line: usize, message: String },
}

impl ParseError {
    pub fn line(&self) -> usize {
        match *self {
            ParseError::Syntax { line, .. }
            | ParseError::Unbalanced { line, .. }
            | ParseError::UnknownSpecies { line, .. }
            | ParseError::DuplicateSpecies { line, .. }
            | ParseError::UnsupportedKind { line, .. }
            | ParseError::Invalid { line, .. } => line,
        }
    }
}

const UNSUPPORTED: &[&str] = &["troe", "plog", "sri", "chebyshev", "pdep-arrhenius"];

#[derive(Clone, Copy, PartialEq)]
enum Section {
    None,
    Elements,
    Species,
    Reactions,
}

struct Line<'a> {
    number: usize,
    text: &'a str,
}

impl Line<'_> {
    fn syntax(&self, offset: usize, message: impl Into<String>) -> ParseError {
        ParseError::Syntax {
            line: self.number,
            column: self.text[..offset.min(self.text.len())].chars().count() + 1,
            message: message.into(),
        }
    }

    /// Byte offset of `part` inside the line (it must be a subslice).
    fn offset_of(&self, part: &str) -> usize {
        (part.as_ptr() as usize).saturating_sub(self.text.as_ptr() as usize)
    }
}

/// Whitespace-separated tokens with their byte offsets.
fn tokens(s: &str) -> impl Iterator<Item = (usize, &str)> {
    s.split_whitespace()
        .map(move |t| ((t.as_ptr() as usize) - (s.as_ptr() as usize), t))
}

fn number(line: &Line, token: &str) -> Result<f64, ParseError> {
    let v: f64 = token
        .parse()
        .map_err(|_| line.syntax(line.offset_of(token), format!("expected a number, found `{token}`")))?;
    if !v.is_finite() {
        return Err(line.syntax(line.offset_of(token), "number must be finite"));
    }
    Ok(v)
}

struct PendingSpecies {
    line: usize,
    input: SpeciesInput,
    low: Option<[f64; 7]>,
    high: Option<[f64; 7]>,
}

struct ParsedReaction {
    line: usize,
    reversible: bool,
    reaction: Reaction,
}

/// Parse and validate a mechanism file, expanding every reversible reaction
/// into a forward/reverse pair.
pub fn parse_mechanism(text: &str) -> Result<Mechanism, ParseError> {
    let mut section = Section::None;
    let mut seen_sections = Vec::new();
    let mut elements: Vec<Element> = Vec::new();
    let mut species: Vec<PendingSpecies> = Vec::new();
    let mut names: BTreeMap<String, usize> = BTreeMap::new();
    let mut reactions: Vec<ParsedReaction> = Vec::new();
    let mut last_line = 0;

    for (idx, raw) in text.lines().enumerate() {
        let text = raw.split('#').next().unwrap_or("");
        let line = Line { number: idx + 1, text };
        last_line = idx + 1;
        let trimmed = text.trim();
        if trimmed.is_empty() {
            continue;
        }
        let first = trimmed.split_whitespace().next().unwrap_or("");
        if section == Section::None {
            let next = match first {
                "ELEMENTS" => Section::Elements,
                "SPECIES" => Section::Species,
                "REACTIONS" => Section::Reactions,
                _ => {
                    return Err(line.syntax(
                        line.offset_of(first),
                        format!("expected ELEMENTS, SPECIES or REACTIONS, found `{first}`"),
                    ))
                }
            };
            if seen_sections.contains(&first) {
                return Err(line.syntax(line.offset_of(first), format!("section {first} repeated")));
            }
            let expected = ["ELEMENTS", "SPECIES", "REACTIONS"][seen_sections.len()];
            if first != expected {
                return Err(line.syntax(line.offset_of(first), format!("expected section {expected}")));
            }
            seen_sections.push(first);
            if trimmed != first {
                return Err(line.syntax(line.offset_of(first) + first.len(), "unexpected text after section keyword"));
            }
            section = next;
            continue;
        }
        if trimmed == "END" {
            if section == Section::Species {
                if let Some(sp) = species.last() {
                    if sp.high.is_none() {
                        return Err(line.syntax(line.offset_of(first), format!("species {} lacks `low`/`high` coefficient lines", sp.input.name)));
                    }
                }
            }
            section = Section::None;
            continue;
        }
        match section {
            Section::Elements => {
                for (off, tok) in tokens(text) {
                    let (sym, weight) = match tok.split_once('/') {
                        Some((s, w)) => {
                            let w = number(&line, w)?;
                            if !(w > 0.0) {
                                return Err(line.syntax(off, "atomic weight must be positive"));
                            }
                            (s, Some(w))
                        }
                        None => (tok, None),
                    };
                    if sym.is_empty() || !sym.chars().all(|c| c.is_ascii_alphabetic()) {
                        return Err(line.syntax(off, format!("invalid element symbol `{sym}`")));
                    }
                    if elements.iter().any(|e| e.symbol == sym) {
                        return Err(line.syntax(off, format!("element {sym} declared twice")));
                    }
                    let weight = match weight {
                        Some(w) => w,
                        None => Element::standard(sym)
                            .ok_or_else(|| line.syntax(off, format!("no standard weight for element {sym}; write {sym}/weight")))?
                            .weight,
                    };
                    elements.push(Element { symbol: sym.into(), weight });
                }
            }
            Section::Species => parse_species_line(&line, first, &mut species, &mut names)?,
            Section::Reactions => {
                let n = reactions.len() + 1;
                reactions.push(parse_reaction(&line, &names, n)?);
            }
            Section::None => unreachable!(),
        }
    }
    if section != Section::None {
        return Err(ParseError::Syntax {
            line: last_line,
            column: 1,
            message: "missing END".into(),
        });
    }
    if seen_sections.len() < 2 {
        return Err(ParseError::Syntax {
            line: last_line.max(1),
            column: 1,
            message: "ELEMENTS and SPECIES sections are required".into(),
        });
    }

    let species_lines: Vec<usize> = species.iter().map(|s| s.line).collect();
    let inputs: Vec<SpeciesInput> = species
        .into_iter()
        .map(|mut s| {
            s.input.thermo.low = s.low.unwrap_or_default();
            s.input.thermo.high = s.high.unwrap_or_default();
            s.input
        })
        .collect();

    let mut expanded = Vec::with_capacity(reactions.len() * 2);
    let mut origin = Vec::with_capacity(reactions.len() * 2);
    for (i, p) in reactions.into_iter().enumerate() {
        let n = i + 1;
        if p.reversible {
            let mut fwd = p.reaction;
            fwd.source_tag = SourceTag::Forward(n);
            let mut rev = fwd.reversed();
            rev.source_tag = SourceTag::Reverse(n);
            expanded.push(fwd);
            expanded.push(rev);
            origin.push((p.line, n));
            origin.push((p.line, n));
        } else {
            let mut r = p.reaction;
            r.source_tag = SourceTag::Irreversible(n);
            expanded.push(r);
            origin.push((p.line, n));
        }
    }

    Mechanism::new(elements, inputs, expanded).map_err(|e| match e {
        MechanismError::DuplicateSpecies(name) => ParseError::DuplicateSpecies { line: 0, name },
        MechanismError::UnknownElement { species, element } => {
            let line = species_line(&species_lines, &names, &species);
            ParseError::Invalid {
                line,
                message: format!("species {species} uses undeclared element {element}"),
            }
        }
        MechanismError::InvalidSpecies { species, reason } => ParseError::Invalid {
            line: species_line(&species_lines, &names, &species),
            message: format!("species {species}: {reason}"),
        },
        MechanismError::Unbalanced {
            reaction,
            element,
            reactants,
            products,
        } => ParseError::Unbalanced {
            line: origin[reaction].0,
            reaction: origin[reaction].1,
            element,
            reactants,
            products,
        },
        MechanismError::SpeciesIndexOutOfRange { reaction, index } => ParseError::Invalid {
            line: origin[reaction].0,
            message: format!("species index {index} out of range"),
        },
        MechanismError::InvalidReaction { reaction, reason } => ParseError::Invalid {
            line: origin[reaction].0,
            message: format!("reaction R{}: {reason}", origin[reaction].1),
        },
    })
}

fn species_line(lines: &[usize], names: &BTreeMap<String, usize>, name: &str) -> usize {
    names.get(name).map_or(0, |&i| lines[i])
}

fn parse_species_line(
    line: &Line,
    first: &str,
    species: &mut Vec<PendingSpecies>,
    names: &mut BTreeMap<String, usize>,
) -> Result<(), ParseError> {
    if first == "low" || first == "high" {
        let Some(sp) = species.last_mut() else {
            return Err(line.syntax(line.offset_of(first), "coefficient line before any species header"));
        };
        let values: Vec<&str> = line.text.split_whitespace().skip(1).collect();
        if values.len() != 7 {
            return Err(line.syntax(
                line.offset_of(first),
                format!("expected 7 coefficients after `{first}`, found {}", values.len()),
            ));
        }
        let mut a = [0.0; 7];
        for (slot, tok) in a.iter_mut().zip(&values) {
            *slot = number(line, tok)?;
        }
        if first == "high" && sp.low.is_none() {
            return Err(line.syntax(line.offset_of(first), "`low` must precede `high`"));
        }
        let name = sp.input.name.clone();
        let target = if first == "low" { &mut sp.low } else { &mut sp.high };
        if target.is_some() {
            return Err(line.syntax(line.offset_of(first), format!("`{first}` given twice for {name}")));
        }
        *target = Some(a);
        return Ok(());
    }
    if let Some(prev) = species.last() {
        if prev.high.is_none() {
            return Err(line.syntax(line.offset_of(first), format!("species {} lacks `low`/`high` coefficient lines", prev.input.name)));
        }
    }
    let name = first;
    if name.contains('=') {
        return Err(line.syntax(line.offset_of(name), "species header must start with the name"));
    }
    if names.contains_key(name) {
        return Err(ParseError::DuplicateSpecies {
            line: line.number,
            name: name.into(),
        });
    }
    let mut weight = None;
    let mut elements = None;
    let mut temps = None;
    for (off, tok) in tokens(line.text).skip(1) {
        let Some((key, value)) = tok.split_once('=') else {
            return Err(line.syntax(off, format!("expected key=value, found `{tok}`")));
        };
        match key {
            "weight" => weight = Some(number(line, value)?),
            "elements" => {
                let mut map = BTreeMap::new();
                for part in value.split(',') {
                    let (el, count) = part
                        .split_once(':')
                        .ok_or_else(|| line.syntax(off, format!("expected ELEMENT:COUNT, found `{part}`")))?;
                    let count: u32 = count
                        .parse()
                        .map_err(|_| line.syntax(off, format!("invalid atom count `{count}`")))?;
                    if count == 0 || map.insert(el.to_string(), count).is_some() {
                        return Err(line.syntax(off, format!("invalid or repeated element `{el}`")));
                    }
                }
                elements = Some(map);
            }
            "temps" => {
                let t: Vec<&str> = value.split(',').collect();
                if t.len() != 3 {
                    return Err(line.syntax(off, "temps needs t_low,t_mid,t_high"));
                }
                temps = Some([number(line, t[0])?, number(line, t[1])?, number(line, t[2])?]);
            }
            _ => return Err(line.syntax(off, format!("unknown species key `{key}`"))),
        }
    }
    let elements = elements.ok_or_else(|| line.syntax(line.text.len(), format!("species {name} lacks elements=")))?;
    let [t_low, t_mid, t_high] = temps.ok_or_else(|| line.syntax(line.text.len(), format!("species {name} lacks temps=")))?;
    names.insert(name.to_string(), species.len());
    species.push(PendingSpecies {
        line: line.number,
        input: SpeciesInput {
            name: name.into(),
            stated_weight: weight,
            elements,
            thermo: Nasa7 {
                low: [0.0; 7],
                high: [0.0; 7],
                t_low,
                t_mid,
                t_high,
            },
        },
        low: None,
        high: None,
    });
    Ok(())
}

#[derive(Default)]
struct Side {
    species: BTreeMap<usize, u32>,
    plain_m: bool,
    falloff_m: bool,
}

fn parse_side(line: &Line, side: &str, names: &BTreeMap<String, usize>) -> Result<Side, ParseError> {
    let mut out = Side::default();
    let mut rest = side;
    // pull out "(+M)" before splitting on '+'
    let mut cleaned = String::with_capacity(side.len());
    while let Some(pos) = rest.find("(+M)") {
        cleaned.push_str(&rest[..pos]);
        cleaned.push_str("    ");
        if out.falloff_m {
            return Err(line.syntax(line.offset_of(&rest[pos..]), "(+M) given twice"));
        }
        out.falloff_m = true;
        rest = &rest[pos + 4..];
    }
    cleaned.push_str(rest);
    let base = line.offset_of(side);
    let mut start = 0;
    for term in cleaned.split('+') {
        let off = base + start;
        start += term.len() + 1;
        let t = term.trim();
        if t.is_empty() {
            if out.falloff_m && cleaned.trim().is_empty() {
                continue;
            }
            if term.len() == cleaned.len() && out.falloff_m {
                continue;
            }
            return Err(line.syntax(off, "empty term"));
        }
        let mut parts = t.split_whitespace();
        let a = parts.next().unwrap();
        let (coef, name) = match parts.next() {
            Some(b) => {
                let c: u32 = a
                    .parse()
                    .map_err(|_| line.syntax(off, format!("invalid stoichiometric coefficient `{a}`")))?;
                (c, b)
            }
            None => {
                // allow "2H2"-style leading digits only when the remainder is a known species
                let digits: String = a.chars().take_while(|c| c.is_ascii_digit()).collect();
                if !digits.is_empty() && !names.contains_key(a) && names.contains_key(&a[digits.len()..]) {
                    (digits.parse().unwrap(), &a[digits.len()..])
                } else {
                    (1, a)
                }
            }
        };
        if parts.next().is_some() {
            return Err(line.syntax(off, format!("unexpected text in term `{t}`")));
        }
        if coef == 0 {
            return Err(line.syntax(off, "stoichiometric coefficient must be positive"));
        }
        if name == "M" {
            if coef != 1 || out.plain_m {
                return Err(line.syntax(off, "M must appear once with unit coefficient"));
            }
            out.plain_m = true;
            continue;
        }
        let Some(&idx) = names.get(name) else {
            let col_off = line.offset_of(t).max(off);
            return Err(ParseError::UnknownSpecies {
                line: line.number,
                column: line.text[..col_off].chars().count() + 1,
                name: name.into(),
            });
        };
        *out.species.entry(idx).or_insert(0) += coef;
    }
    if out.species.is_empty() {
        return Err(line.syntax(base, "reaction side without species"));
    }
    Ok(out)
}

fn parse_reaction(line: &Line, names: &BTreeMap<String, usize>, n: usize) -> Result<ParsedReaction, ParseError> {
    let parts: Vec<&str> = line.text.split('|').collect();
    if parts.len() != 3 {
        return Err(line.syntax(
            line.offset_of(line.text.trim_start()),
            format!("reaction needs `equation | A b Ea | kind`, found {} field(s)", parts.len()),
        ));
    }
    let (equation, rate, kind_field) = (parts[0], parts[1], parts[2]);
    let (lhs, rhs, reversible) = if let Some(p) = equation.find("<=>") {
        (&equation[..p], &equation[p + 3..], true)
    } else if let Some(p) = equation.find("=>") {
        (&equation[..p], &equation[p + 2..], false)
    } else if equation.contains('=') {
        let p = equation.find('=').unwrap();
        return Err(line.syntax(line.offset_of(equation) + p, "use `=>` or `<=>`"));
    } else {
        return Err(line.syntax(line.offset_of(equation), "missing `=>` or `<=>`"));
    };
    if rhs.contains("=>") || rhs.contains('=') {
        return Err(line.syntax(line.offset_of(rhs), "more than one arrow"));
    }
    let left = parse_side(line, lhs, names)?;
    let right = parse_side(line, rhs, names)?;

    let rate_tokens: Vec<(usize, &str)> = tokens(rate).collect();
    if rate_tokens.len() != 3 {
        return Err(line.syntax(line.offset_of(rate), "expected three rate parameters `A b Ea`"));
    }
    let arrhenius = Arrhenius {
        a: number(line, rate_tokens[0].1)?,
        b: number(line, rate_tokens[1].1)?,
        ea: number(line, rate_tokens[2].1)?,
    };

    let mut kind_tokens = tokens(kind_field);
    let Some((_, kind)) = kind_tokens.next() else {
        return Err(line.syntax(line.offset_of(kind_field), "missing reaction kind"));
    };
    let kind_lower = kind.to_ascii_lowercase();
    if UNSUPPORTED.contains(&kind_lower.as_str()) {
        return Err(ParseError::UnsupportedKind {
            line: line.number,
            kind: kind.into(),
        });
    }
    let mut low = None;
    let mut efficiencies = BTreeMap::new();
    for (_, tok) in kind_tokens {
        let Some((key, value)) = tok.split_once('=') else {
            return Err(line.syntax(line.offset_of(tok), format!("expected key=value, found `{tok}`")));
        };
        let key_lower = key.to_ascii_lowercase();
        if UNSUPPORTED.contains(&key_lower.as_str()) {
            return Err(ParseError::UnsupportedKind {
                line: line.number,
                kind: key.into(),
            });
        }
        if key == "low" {
            let v: Vec<&str> = value.split(',').collect();
            if v.len() != 3 {
                return Err(line.syntax(line.offset_of(tok), "low needs A,b,Ea"));
            }
            low = Some(Arrhenius {
                a: number(line, v[0])?,
                b: number(line, v[1])?,
                ea: number(line, v[2])?,
            });
            continue;
        }
        let Some(&idx) = names.get(key) else {
            return Err(ParseError::UnknownSpecies {
                line: line.number,
                column: line.text[..line.offset_of(tok)].chars().count() + 1,
                name: key.into(),
            });
        };
        let eff = number(line, value)?;
        if efficiencies.insert(idx, eff).is_some() {
            return Err(line.syntax(line.offset_of(tok), format!("efficiency for {key} repeated")));
        }
    }

    let kind_off = line.offset_of(kind);
    let kind = match kind {
        "elementary" => {
            if left.plain_m || right.plain_m || left.falloff_m || right.falloff_m {
                return Err(line.syntax(kind_off, "elementary reaction must not contain M"));
            }
            if !efficiencies.is_empty() || low.is_some() {
                return Err(line.syntax(kind_off, "elementary reaction takes no options"));
            }
            ReactionKind::Elementary
        }
        "three-body" => {
            if !(left.plain_m && right.plain_m) || left.falloff_m || right.falloff_m {
                return Err(line.syntax(kind_off, "three-body reaction needs `+ M` on both sides"));
            }
            if low.is_some() {
                return Err(line.syntax(kind_off, "low= is only valid for falloff"));
            }
            ReactionKind::ThreeBody
        }
        "falloff" => {
            if !(left.falloff_m && right.falloff_m) || left.plain_m || right.plain_m {
                return Err(line.syntax(kind_off, "falloff reaction needs `(+M)` on both sides"));
            }
            let low = low.ok_or_else(|| line.syntax(kind_off, "falloff reaction needs low=A,b,Ea"))?;
            ReactionKind::Falloff { low }
        }
        other => {
            return Err(line.syntax(kind_off, format!("unknown reaction kind `{other}`")));
        }
    };
    Ok(ParsedReaction {
        line: line.number,
        reversible,
        reaction: Reaction {
            reactants: left.species,
            products: right.species,
            arrhenius,
            kind,
            efficiencies,
            equilibrium_reverse: false,
            source_tag: SourceTag::Irreversible(n),
        },
    })
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum WriteError {
    #[error("reaction {index} ({tag}) is an equilibrium reverse without its forward partner")]
    OrphanReverse { index: usize, tag: SourceTag },
}

fn side_text(mech: &Mechanism, side: &BTreeMap<usize, u32>, kind: &ReactionKind) -> String {
    let mut terms: Vec<String> = side
        .iter()
        .map(|(&s, &c)| {
            let name = &mech.species()[s].name;
            if c == 1 {
                name.clone()
            } else {
                format!("{c} {name}")
            }
        })
        .collect();
    match kind {
        ReactionKind::Elementary => terms.join(" + "),
        ReactionKind::ThreeBody => {
            terms.push("M".into());
            terms.join(" + ")
        }
        ReactionKind::Falloff { .. } => format!("{} (+M)", terms.join(" + ")),
    }
}

/// Emit `mechanism` in the text grammar. Adjacent forward/reverse pairs are
/// written back as one reversible reaction. Numbers use the shortest
/// round-trip representation, so parsing the output reproduces the
/// mechanism exactly.
pub fn write_mechanism(mech: &Mechanism, header: &str) -> Result<String, WriteError> {
    let mut out = String::new();
    for l in header.lines() {
        let _ = writeln!(out, "# {l}");
    }
    if !header.is_empty() {
        out.push('\n');
    }
    out.push_str("ELEMENTS\n ");
    for e in mech.elements() {
        match Element::standard(&e.symbol) {
            Some(std) if std.weight == e.weight => {
                let _ = write!(out, " {}", e.symbol);
            }
            _ => {
                let _ = write!(out, " {}/{}", e.symbol, e.weight);
            }
        }
    }
    out.push_str("\nEND\n\nSPECIES\n");
    for sp in mech.species() {
        let elements: Vec<String> = sp.elements.iter().map(|(e, n)| format!("{e}:{n}")).collect();
        let th = &sp.thermo;
        let _ = writeln!(
            out,
            "  {} weight={} elements={} temps={},{},{}",
            sp.name,
            sp.molecular_weight,
            elements.join(","),
            th.t_low,
            th.t_mid,
            th.t_high
        );
        for (label, coeffs) in [("low ", &th.low), ("high", &th.high)] {
            let _ = write!(out, "    {label}");
            for c in coeffs {
                let _ = write!(out, " {c:e}");
            }
            out.push('\n');
        }
    }
    out.push_str("END\n\nREACTIONS\n");
    let rx = mech.reactions();
    let mut j = 0;
    while j < rx.len() {
        let r = &rx[j];
        if r.equilibrium_reverse {
            return Err(WriteError::OrphanReverse { index: j, tag: r.source_tag });
        }
        let paired = rx.get(j + 1).is_some_and(|next| {
            next.equilibrium_reverse
                && next.reactants == r.products
                && next.products == r.reactants
                && next.arrhenius == r.arrhenius
                && next.kind == r.kind
                && next.efficiencies == r.efficiencies
        });
        let arrow = if paired { "<=>" } else { "=>" };
        let a = &r.arrhenius;
        let _ = write!(
            out,
            "  {} {arrow} {} | {} {} {} | ",
            side_text(mech, &r.reactants, &r.kind),
            side_text(mech, &r.products, &r.kind),
            a.a,
            a.b,
            a.ea
        );
        match &r.kind {
            ReactionKind::Elementary => out.push_str("elementary"),
            ReactionKind::ThreeBody => out.push_str("three-body"),
            ReactionKind::Falloff { low } => {
                let _ = write!(out, "falloff low={},{},{}", low.a, low.b, low.ea);
            }
        }
        for (&s, &e) in &r.efficiencies {
            let _ = write!(out, " {}={}", mech.species()[s].name, e);
        }
        out.push('\n');
        j += if paired { 2 } else { 1 };
    }
    out.push_str("END\n");
    Ok(out)
}

/// One line of a reaction as it would appear in a file, e.g. for CSV output.
pub fn reaction_equation(mech: &Mechanism, j: usize) -> String {
    let r = &mech.reactions()[j];
    format!(
        "{} => {}",
        side_text(mech, &r.reactants, &r.kind),
        side_text(mech, &r.products, &r.kind)
    )
}

/// Equality up to the file line numbers recorded in source tags, which a
/// written and re-read mechanism renumbers.
pub fn same_content(a: &Mechanism, b: &Mechanism) -> bool {
    let strip = |r: &Reaction| {
        let mut r = r.clone();
        r.source_tag = match r.source_tag {
            SourceTag::Irreversible(_) => SourceTag::Irreversible(0),
            SourceTag::Forward(_) => SourceTag::Forward(0),
            SourceTag::Reverse(_) => SourceTag::Reverse(0),
        };
        r
    };
    a.elements() == b.elements()
        && a.species() == b.species()
        && a.n_reactions() == b.n_reactions()
        && a.reactions().iter().zip(b.reactions()).all(|(x, y)| strip(x) == strip(y))
}
