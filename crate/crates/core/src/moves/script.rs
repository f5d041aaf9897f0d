//! Line format for move scripts.
//!
//! ```text
//! O w { a:1 b:2 | c:1 }            I- w { a:1 | - }
//! I+ [a b] { s:1,2 ; t:0,3 @ 1,0 }  R+ w    S w    S^ w { a:1 }
//! C+ u    P+ u    INV <move>
//! ```
//! Inverse amalgamations take either the split's own arguments (`INV O w {..}`
//! merges `w#1..w#n` back into `w`) or an explicit group `INV O [a b] as w`.
//! `INV R+ s { x:k .. } as w` restores `w` from the source `s`, each listed `x`
//! regaining `k` edges to it; the name defaults to `s` without its trailing `~`.

use super::{MoveError, MovePlan, Profile};
use crate::graph::Multiplicity;

fn err(msg: impl Into<String>) -> MoveError {
    MoveError::Script(msg.into())
}

fn tokenize(line: &str) -> Vec<String> {
    let mut spaced = String::with_capacity(line.len() + 16);
    for c in line.chars() {
        if "{}[]|;@".contains(c) {
            spaced.push(' ');
            spaced.push(c);
            spaced.push(' ');
        } else {
            spaced.push(c);
        }
    }
    spaced.split_whitespace().map(str::to_string).collect()
}

struct Cursor {
    toks: Vec<String>,
    pos: usize,
}

impl Cursor {
    fn next(&mut self) -> Option<String> {
        let t = self.toks.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn peek(&self) -> Option<&str> {
        self.toks.get(self.pos).map(String::as_str)
    }

    fn name(&mut self, what: &str) -> Result<String, MoveError> {
        match self.next() {
            Some(t) if crate::graph::valid_label(&t) => Ok(t),
            Some(t) => Err(err(format!("expected {what}, found `{t}`"))),
            None => Err(err(format!("missing {what}"))),
        }
    }

    fn expect(&mut self, tok: &str) -> Result<(), MoveError> {
        match self.next() {
            Some(t) if t == tok => Ok(()),
            Some(t) => Err(err(format!("expected `{tok}`, found `{t}`"))),
            None => Err(err(format!("expected `{tok}`"))),
        }
    }

    /// Tokens up to the matching close bracket (exclusive).
    fn until(&mut self, close: &str) -> Result<Vec<String>, MoveError> {
        let mut out = Vec::new();
        loop {
            match self.next() {
                Some(t) if t == close => return Ok(out),
                Some(t) => out.push(t),
                None => return Err(err(format!("missing `{close}`"))),
            }
        }
    }

    fn finish(&self) -> Result<(), MoveError> {
        match self.peek() {
            None => Ok(()),
            Some(t) => Err(err(format!("unexpected trailing `{t}`"))),
        }
    }
}

fn mult(s: &str) -> Result<Multiplicity, MoveError> {
    s.parse::<Multiplicity>().map_err(err)
}

fn entry(tok: &str) -> Result<(String, Multiplicity), MoveError> {
    let (v, m) = tok.rsplit_once(':').ok_or_else(|| err(format!("expected `vertex:count`, found `{tok}`")))?;
    if !crate::graph::valid_label(v) {
        return Err(err(format!("bad vertex name `{v}`")));
    }
    Ok((v.to_string(), mult(m)?))
}

fn profile(toks: &[String]) -> Result<Profile, MoveError> {
    if toks.len() == 1 && toks[0] == "-" {
        return Ok(Vec::new());
    }
    if toks.is_empty() {
        return Err(err("empty part must be written `-`"));
    }
    toks.iter().map(|t| entry(t)).collect()
}

fn parts(c: &mut Cursor) -> Result<Vec<Profile>, MoveError> {
    c.expect("{")?;
    let body = c.until("}")?;
    body.split(|t| t == "|").map(profile).collect()
}

fn single_profile(c: &mut Cursor) -> Result<Profile, MoveError> {
    c.expect("{")?;
    let body = c.until("}")?;
    profile(&body)
}

fn group(c: &mut Cursor) -> Result<Vec<String>, MoveError> {
    c.expect("[")?;
    let names = c.until("]")?;
    for n in &names {
        if !crate::graph::valid_label(n) {
            return Err(err(format!("bad vertex name `{n}`")));
        }
    }
    if names.is_empty() {
        return Err(err("empty vertex group"));
    }
    Ok(names)
}

fn mult_list(s: &str) -> Result<Vec<Multiplicity>, MoveError> {
    s.split(',').map(mult).collect()
}

type Splits = Vec<(String, Vec<Multiplicity>)>;

fn redistribution(c: &mut Cursor) -> Result<(Vec<String>, Splits, Vec<Multiplicity>), MoveError> {
    let g = group(c)?;
    c.expect("{")?;
    let body = c.until("}")?;
    let at = body.iter().position(|t| t == "@").ok_or_else(|| err("missing `@` before the within-group row"))?;
    let within = mult_list(&body[at + 1..].concat())?;
    let mut splits = Vec::new();
    for chunk in body[..at].split(|t| t == ";") {
        if chunk.is_empty() {
            continue;
        }
        let joined = chunk.concat();
        let (s, ms) =
            joined.split_once(':').ok_or_else(|| err(format!("expected `source:counts`, found `{joined}`")))?;
        splits.push((s.to_string(), mult_list(ms)?));
    }
    Ok((g, splits, within))
}

fn optional_as(c: &mut Cursor) -> Result<Option<String>, MoveError> {
    if c.peek() == Some("as") {
        c.next();
        return c.name("vertex name after `as`").map(Some);
    }
    Ok(None)
}

fn derived(w: &str, n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("{w}#{i}")).collect()
}

/// Merge group from either `w { parts }` or `[group] (as w)?`.
fn merge_args(c: &mut Cursor) -> Result<(String, Vec<String>), MoveError> {
    if c.peek() == Some("[") {
        let g = group(c)?;
        let w = optional_as(c)?.unwrap_or_else(|| g[0].clone());
        Ok((w, g))
    } else {
        let w = c.name("vertex")?;
        let n = parts(c)?.len();
        Ok((w.clone(), derived(&w, n)))
    }
}

pub(super) fn parse_plan(line: &str) -> Result<MovePlan, MoveError> {
    let mut c = Cursor { toks: tokenize(line), pos: 0 };
    let mut head = c.next().ok_or_else(|| err("empty line"))?;
    let inverse = head == "INV";
    if inverse {
        head = c.next().ok_or_else(|| err("missing move after INV"))?;
    }
    let plan = match (head.as_str(), inverse) {
        ("O", false) => {
            let w = c.name("vertex")?;
            MovePlan::OutSplit { w, parts: parts(&mut c)? }
        }
        ("I-", false) => {
            let w = c.name("vertex")?;
            MovePlan::InSplit { w, parts: parts(&mut c)? }
        }
        ("O", true) => {
            let (w, group) = merge_args(&mut c)?;
            MovePlan::OutMerge { w, group }
        }
        ("I-", true) => {
            let (w, group) = merge_args(&mut c)?;
            MovePlan::InMerge { w, group }
        }
        ("I+", inverse) => {
            let (group, splits, within) = redistribution(&mut c)?;
            MovePlan::Redistribute { group, splits, within, inverse }
        }
        ("R+", false) => MovePlan::Reduce { w: c.name("vertex")? },
        ("R+", true) => {
            let source = c.name("source")?;
            let coeffs = single_profile(&mut c)?;
            let w = optional_as(&mut c)?.unwrap_or_else(|| source.strip_suffix('~').unwrap_or(&source).to_string());
            MovePlan::Unreduce { w, source, coeffs }
        }
        ("S", false) | ("S^", true) => MovePlan::RemoveSource { w: c.name("vertex")? },
        ("S^", false) | ("S", true) => {
            let w = c.name("vertex")?;
            MovePlan::AddSource { w, row: single_profile(&mut c)? }
        }
        ("C+", false) => MovePlan::Splice { u: c.name("vertex")? },
        ("C+", true) => MovePlan::Unsplice { u: c.name("vertex")? },
        ("P+", false) => MovePlan::Enclose { u: c.name("vertex")? },
        ("P+", true) => MovePlan::Unenclose { u: c.name("vertex")? },
        (other, _) => return Err(err(format!("unknown move `{other}`"))),
    };
    c.finish()?;
    Ok(plan)
}

fn fmt_profile(p: &Profile) -> String {
    if p.is_empty() {
        return "-".into();
    }
    p.iter().map(|(v, m)| format!("{v}:{m}")).collect::<Vec<_>>().join(" ")
}

fn fmt_parts(ps: &[Profile]) -> String {
    let body: Vec<String> = ps.iter().map(fmt_profile).collect();
    format!("{{ {} }}", body.join(" | "))
}

fn fmt_list(ms: &[Multiplicity]) -> String {
    ms.iter().map(Multiplicity::to_string).collect::<Vec<_>>().join(",")
}

fn fmt_merge(kind: &str, w: &str, group: &[String]) -> String {
    let mut s = format!("INV {kind} [{}]", group.join(" "));
    if w != group[0] {
        s.push_str(&format!(" as {w}"));
    }
    s
}

pub(super) fn format_plan(p: &MovePlan) -> String {
    match p {
        MovePlan::OutSplit { w, parts } => format!("O {w} {}", fmt_parts(parts)),
        MovePlan::InSplit { w, parts } => format!("I- {w} {}", fmt_parts(parts)),
        MovePlan::OutMerge { w, group } => fmt_merge("O", w, group),
        MovePlan::InMerge { w, group } => fmt_merge("I-", w, group),
        MovePlan::Redistribute { group, splits, within, inverse } => {
            let mut body: Vec<String> = splits.iter().map(|(s, ms)| format!("{s}:{}", fmt_list(ms))).collect();
            let sep = if body.is_empty() { "" } else { " " };
            let joined = std::mem::take(&mut body).join(" ; ");
            format!(
                "{}I+ [{}] {{ {joined}{sep}@ {} }}",
                if *inverse { "INV " } else { "" },
                group.join(" "),
                fmt_list(within)
            )
        }
        MovePlan::Reduce { w } => format!("R+ {w}"),
        MovePlan::Unreduce { w, source, coeffs } => {
            let mut s = format!("INV R+ {source} {{ {} }}", fmt_profile(coeffs));
            if source.strip_suffix('~').unwrap_or(source) != w {
                s.push_str(&format!(" as {w}"));
            }
            s
        }
        MovePlan::RemoveSource { w } => format!("S {w}"),
        MovePlan::AddSource { w, row } => format!("S^ {w} {{ {} }}", fmt_profile(row)),
        MovePlan::Splice { u } => format!("C+ {u}"),
        MovePlan::Unsplice { u } => format!("INV C+ {u}"),
        MovePlan::Enclose { u } => format!("P+ {u}"),
        MovePlan::Unenclose { u } => format!("INV P+ {u}"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_lines() {
        for line in [
            "O w { a:1 b:2 | c:inf }",
            "I- w { a:1 | - }",
            "I+ [a b] { s:1,2 ; t:0,3 @ 1,0 }",
            "INV I+ [a b] { @ 1,0 }",
            "R+ w",
            "INV R+ w~ { x:2 y:1 }",
            "INV R+ s { x:1 } as w",
            "S w",
            "S^ w { a:1 }",
            "C+ u",
            "INV C+ u",
            "P+ u",
            "INV P+ u",
            "INV O [a b]",
            "INV I- [a b] as w",
        ] {
            let p = parse_plan(line).unwrap();
            assert_eq!(format_plan(&p), line);
        }
    }

    #[test]
    fn braced_inverse_names_derived_group() {
        let p = parse_plan("INV O w { a:1 | b:1 }").unwrap();
        assert_eq!(p, MovePlan::OutMerge { w: "w".into(), group: vec!["w#1".into(), "w#2".into()] });
        assert_eq!(parse_plan("INV S w { a:1 }").unwrap(), parse_plan("S^ w { a:1 }").unwrap());
        assert_eq!(parse_plan("INV S^ w").unwrap(), parse_plan("S w").unwrap());
    }

    #[test]
    fn rejects() {
        for bad in ["", "X w", "O w", "O w { }", "O w { a }", "R+ w extra", "I+ [a b] { s:1 }", "O w { a:x }"] {
            assert!(parse_plan(bad).is_err(), "{bad}");
        }
    }
}
