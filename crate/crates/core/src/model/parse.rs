use std::collections::HashSet;

use thiserror::Error;

use super::{ArcRef, Gluing, Interval, Orientation, Side, SideSpec, Strip, StripModel};
use crate::rational::ExtRat;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("line {line}: syntax error: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: unknown strip `{name}`")]
    UnknownStrip { line: usize, name: String },
    #[error("line {line}: unknown arc reference `{reference}`")]
    UnknownArc { line: usize, reference: String },
    #[error("line {line}: malformed rational `{text}`")]
    Rational { line: usize, text: String },
}

fn syntax(line: usize, message: impl Into<String>) -> ParseError {
    ParseError::Syntax { line, message: message.into() }
}

fn valid_name(name: &str) -> bool {
    !name.is_empty() && !name.contains(['.', '(', ')', ',', '#'])
}

fn parse_side(line: usize, text: &str) -> Result<Side, ParseError> {
    match text {
        "bottom" => Ok(Side::Bottom),
        "top" => Ok(Side::Top),
        other => Err(syntax(line, format!("expected `bottom` or `top`, found `{other}`"))),
    }
}

fn parse_ext(line: usize, text: &str) -> Result<ExtRat, ParseError> {
    text.parse().map_err(|_| ParseError::Rational { line, text: text.trim().to_string() })
}

/// Parses `(p,q) (p,q) ...`, tolerating whitespace inside the parentheses.
fn parse_intervals(line: usize, text: &str) -> Result<Vec<Interval>, ParseError> {
    let mut out = Vec::new();
    let mut rest = text.trim();
    while !rest.is_empty() {
        let body = rest
            .strip_prefix('(')
            .ok_or_else(|| syntax(line, format!("expected `(` at `{rest}`")))?;
        let close = body.find(')').ok_or_else(|| syntax(line, "unterminated interval"))?;
        let (lo, hi) = body[..close]
            .split_once(',')
            .ok_or_else(|| syntax(line, "interval needs two endpoints"))?;
        out.push(Interval { lo: parse_ext(line, lo)?, hi: parse_ext(line, hi)? });
        rest = body[close + 1..].trim_start();
    }
    Ok(out)
}

/// Parses the line-oriented model format. Only syntax and references are checked here;
/// structural rules are left to [`super::validate_model`].
pub fn parse_model(text: &str) -> Result<StripModel, ParseError> {
    let mut model = StripModel::default();
    let mut declared_sides = HashSet::new();
    let mut glue_lines = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (keyword, rest) = content.split_once(char::is_whitespace).unwrap_or((content, ""));
        let rest = rest.trim();
        match keyword {
            "strip" => {
                let (name, extra) = rest.split_once(char::is_whitespace).unwrap_or((rest, ""));
                if !valid_name(name) {
                    return Err(syntax(line, format!("invalid strip id `{name}`")));
                }
                if model.strip_by_name(name).is_some() {
                    return Err(syntax(line, format!("strip `{name}` declared twice")));
                }
                // An optional transversal interval is accepted and normalized away:
                // every strip is stored with transversal (0,1).
                let extra = extra.trim();
                if !extra.is_empty() {
                    let intervals = parse_intervals(line, extra)?;
                    match intervals.as_slice() {
                        [Interval { lo: ExtRat::Finite(lo), hi: ExtRat::Finite(hi) }] if lo < hi => {}
                        _ => return Err(syntax(line, "strip transversal must be one finite interval (a,b) with a<b")),
                    }
                }
                model.strips.push(Strip::new(name));
            }
            "side" => {
                let mut parts = rest.splitn(3, char::is_whitespace);
                let name = parts.next().unwrap_or("");
                let side_text = parts.next().ok_or_else(|| syntax(line, "missing side"))?;
                let spec_text = parts.next().unwrap_or("").trim();
                let strip = model
                    .strip_by_name(name)
                    .ok_or_else(|| ParseError::UnknownStrip { line, name: name.to_string() })?;
                let side = parse_side(line, side_text)?;
                if !declared_sides.insert((strip, side)) {
                    return Err(syntax(line, format!("side {name}.{side} declared twice")));
                }
                let (kind, arcs_text) = spec_text.split_once(char::is_whitespace).unwrap_or((spec_text, ""));
                let spec = match kind {
                    "open" if arcs_text.trim().is_empty() => SideSpec::Open,
                    "boundary" if arcs_text.trim().is_empty() => SideSpec::Boundary,
                    "arcs" => SideSpec::Glued(parse_intervals(line, arcs_text)?),
                    "open" | "boundary" => return Err(syntax(line, format!("`{kind}` takes no arguments"))),
                    other => return Err(syntax(line, format!("expected open|boundary|arcs, found `{other}`"))),
                };
                *model.strips[strip.0].side_mut(side) = spec;
            }
            "glue" => glue_lines.push((line, rest.to_string())),
            other => return Err(syntax(line, format!("unknown directive `{other}`"))),
        }
    }

    for (line, rest) in glue_lines {
        let parts: Vec<&str> = rest.split_whitespace().collect();
        let [a, b, orient] = parts.as_slice() else {
            return Err(syntax(line, "glue expects two arc references and keep|flip"));
        };
        let orientation = match *orient {
            "keep" => Orientation::Keep,
            "flip" => Orientation::Flip,
            other => return Err(syntax(line, format!("expected keep|flip, found `{other}`"))),
        };
        let a = parse_arc_ref(&model, line, a)?;
        let b = parse_arc_ref(&model, line, b)?;
        model.gluings.push(Gluing { a, b, orientation });
    }
    Ok(model)
}

fn parse_arc_ref(model: &StripModel, line: usize, text: &str) -> Result<ArcRef, ParseError> {
    let mut parts = text.rsplitn(3, '.');
    let (Some(index), Some(side), Some(name)) = (parts.next(), parts.next(), parts.next()) else {
        return Err(syntax(line, format!("arc reference `{text}` is not <strip>.<side>.<index>")));
    };
    let strip = model
        .strip_by_name(name)
        .ok_or_else(|| ParseError::UnknownStrip { line, name: name.to_string() })?;
    let side = parse_side(line, side)?;
    let index: usize = index
        .parse()
        .map_err(|_| syntax(line, format!("arc index `{index}` is not a number")))?;
    let arc = ArcRef { strip, side, index };
    if model.arc(arc).is_none() {
        return Err(ParseError::UnknownArc { line, reference: text.to_string() });
    }
    Ok(arc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::model::validate_model;

    #[test]
    fn parses_reference_fixtures() {
        let m0 = parse_model(fixtures::M0).unwrap();
        assert_eq!((m0.strips.len(), m0.gluings.len()), (2, 1));
        let m1 = parse_model(fixtures::M1).unwrap();
        assert_eq!((m1.strips.len(), m1.gluings.len()), (2, 2));
        assert_eq!(m1.strips[0].top.arcs().len(), 2);
        assert_eq!(m1.strips[0].bottom, SideSpec::Open);
    }

    #[test]
    fn same_side_gluing_is_a_validation_error() {
        let text = "strip s1\nside s1 top arcs (0,1) (2,3)\nglue s1.top.0 s1.top.1 keep\n";
        let model = parse_model(text).unwrap();
        let report = validate_model(&model);
        assert!(report.to_string().contains("same-side gluing"), "{report}");
    }

    #[test]
    fn reports_line_numbers() {
        let err = parse_model("strip a\n\nside a middle open\n").unwrap_err();
        assert!(matches!(err, ParseError::Syntax { line: 3, .. }), "{err}");
        let err = parse_model("strip a\nside a top arcs (0,1/0)\n").unwrap_err();
        assert_eq!(err, ParseError::Rational { line: 2, text: "1/0".into() });
        let err = parse_model("strip a\nside b top open\n").unwrap_err();
        assert!(matches!(err, ParseError::UnknownStrip { line: 2, .. }));
        let err = parse_model("strip a\nside a top arcs (0,1)\nglue a.top.0 a.top.4 keep\n").unwrap_err();
        assert!(matches!(err, ParseError::UnknownArc { line: 3, .. }));
    }

    #[test]
    fn accepts_spaces_and_comments() {
        let text = "strip a (0,5)  # rescaled\nstrip b\nside a top arcs ( -inf , 1/2 )   (1/2,+inf)\n\
                    side b bottom arcs (-inf,-1) (-1,+inf)\nglue a.top.0 b.bottom.0 keep\nglue a.top.1 b.bottom.1 keep\n";
        let model = parse_model(text).unwrap();
        assert!(validate_model(&model).is_valid());
    }

    #[test]
    fn display_reparses() {
        for text in fixtures::ALL {
            let model = parse_model(text).unwrap();
            assert_eq!(parse_model(&model.to_string()).unwrap(), model);
        }
    }
}
