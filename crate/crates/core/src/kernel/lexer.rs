use super::parser::{ParseError, ParseErrorKind};

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Tok {
    Ident(String),
    Int(i64),
    Float(f64),
    /// Operators and punctuation, longest match first.
    Punct(&'static str),
    /// A string or character literal; never valid in a kernel.
    Quoted,
    Eof,
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Token {
    pub tok: Tok,
    pub line: usize,
    pub col: usize,
}

const PUNCTS: [&str; 44] = [
    "<<=", ">>=", "++", "--", "+=", "-=", "*=", "/=", "%=", "&=", "|=", "^=", "<<", ">>", "<=",
    ">=", "==", "!=", "&&", "||", "->", "+", "-", "*", "/", "%", "&", "|", "^", "~", "!", "<", ">",
    "=", "(", ")", "[", "]", "{", "}", ";", ",", ".", "?",
];

pub(crate) fn tokenize(src: &str) -> Result<Vec<Token>, ParseError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);

    macro_rules! bump {
        () => {{
            if chars[i] == '\n' {
                line += 1;
                col = 1;
            } else {
                col += 1;
            }
            i += 1;
        }};
    }

    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            bump!();
            continue;
        }
        if c == '/' && chars.get(i + 1) == Some(&'/') {
            while i < chars.len() && chars[i] != '\n' {
                bump!();
            }
            continue;
        }
        if c == '/' && chars.get(i + 1) == Some(&'*') {
            let (l0, c0) = (line, col);
            bump!();
            bump!();
            loop {
                if i >= chars.len() {
                    return Err(ParseError::new(
                        l0,
                        c0,
                        ParseErrorKind::Syntax("unterminated block comment".into()),
                    ));
                }
                if chars[i] == '*' && chars.get(i + 1) == Some(&'/') {
                    bump!();
                    bump!();
                    break;
                }
                bump!();
            }
            continue;
        }
        let (tl, tc) = (line, col);
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                bump!();
            }
            out.push(Token {
                tok: Tok::Ident(chars[start..i].iter().collect()),
                line: tl,
                col: tc,
            });
            continue;
        }
        if c.is_ascii_digit() || (c == '.' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit()))
        {
            let start = i;
            let mut is_float = false;
            while i < chars.len() && chars[i].is_ascii_digit() {
                bump!();
            }
            if i < chars.len() && chars[i] == '.' {
                is_float = true;
                bump!();
                while i < chars.len() && chars[i].is_ascii_digit() {
                    bump!();
                }
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let save = (i, line, col);
                bump!();
                if i < chars.len() && (chars[i] == '+' || chars[i] == '-') {
                    bump!();
                }
                if i < chars.len() && chars[i].is_ascii_digit() {
                    is_float = true;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        bump!();
                    }
                } else {
                    (i, line, col) = save;
                }
            }
            let text: String = chars[start..i].iter().collect();
            // C integer suffixes such as 100L or 10UL are accepted and ignored.
            while i < chars.len() && matches!(chars[i], 'l' | 'L' | 'u' | 'U') && !is_float {
                bump!();
            }
            if i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                return Err(ParseError::new(
                    tl,
                    tc,
                    ParseErrorKind::Syntax(format!("malformed number near {text:?}")),
                ));
            }
            let tok = if is_float {
                Tok::Float(text.parse().map_err(|_| {
                    ParseError::new(tl, tc, ParseErrorKind::Syntax(format!("bad float {text}")))
                })?)
            } else {
                Tok::Int(text.parse().map_err(|_| {
                    ParseError::new(
                        tl,
                        tc,
                        ParseErrorKind::Syntax(format!("integer literal {text} out of range")),
                    )
                })?)
            };
            out.push(Token {
                tok,
                line: tl,
                col: tc,
            });
            continue;
        }
        if c == '"' || c == '\'' {
            out.push(Token {
                tok: Tok::Quoted,
                line: tl,
                col: tc,
            });
            bump!();
            while i < chars.len() && chars[i] != c && chars[i] != '\n' {
                bump!();
            }
            if i < chars.len() && chars[i] == c {
                bump!();
            }
            continue;
        }
        let rest: String = chars[i..(i + 3).min(chars.len())].iter().collect();
        match PUNCTS.iter().find(|p| rest.starts_with(**p)) {
            Some(p) => {
                for _ in 0..p.len() {
                    bump!();
                }
                out.push(Token {
                    tok: Tok::Punct(p),
                    line: tl,
                    col: tc,
                });
            }
            None => {
                return Err(ParseError::new(
                    tl,
                    tc,
                    ParseErrorKind::Syntax(format!("unexpected character {c:?}")),
                ))
            }
        }
    }
    out.push(Token {
        tok: Tok::Eof,
        line,
        col,
    });
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<Tok> {
        tokenize(s).unwrap().into_iter().map(|t| t.tok).collect()
    }

    #[test]
    fn numbers_and_suffixes() {
        assert_eq!(
            toks("100L 2.5 1e3 .5 7"),
            vec![
                Tok::Int(100),
                Tok::Float(2.5),
                Tok::Float(1000.0),
                Tok::Float(0.5),
                Tok::Int(7),
                Tok::Eof
            ]
        );
    }

    #[test]
    fn longest_punct_wins() {
        assert_eq!(
            toks("a<<=b<=c"),
            vec![
                Tok::Ident("a".into()),
                Tok::Punct("<<="),
                Tok::Ident("b".into()),
                Tok::Punct("<="),
                Tok::Ident("c".into()),
                Tok::Eof
            ]
        );
    }

    #[test]
    fn comments_and_positions() {
        let t = tokenize("// c\n/* x\n y */ z").unwrap();
        assert_eq!(t[0].tok, Tok::Ident("z".into()));
        assert_eq!((t[0].line, t[0].col), (3, 7));
    }

    #[test]
    fn unterminated_comment() {
        let e = tokenize("a /* b").unwrap_err();
        assert_eq!((e.line, e.col), (1, 3));
    }

    #[test]
    fn stray_character() {
        let e = tokenize("a = $;").unwrap_err();
        assert_eq!((e.line, e.col), (1, 5));
    }
}
