//! Recursive-descent parser for the formula surface syntax.
//!
//! ```text
//! implication := disjunction ( "->" implication )?
//! disjunction := conjunction ( "|" conjunction )*
//! conjunction := unary ( "&" unary )*
//! unary       := ( "!" | "[]" | "<>" ) unary | primary
//! primary     := atom | "(" implication ")"
//! atom        := [A-Za-z_][A-Za-z0-9_.']*
//! ```
//!
//! Error offsets are character positions (0-based) into the input.

use std::fmt;

use thiserror::Error;

use super::Formula;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{kind} at offset {offset}")]
pub struct ParseError {
    pub offset: usize,
    pub kind: ParseErrorKind,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseErrorKind {
    UnexpectedChar(char),
    UnexpectedToken { found: String, expected: &'static str },
    UnexpectedEnd { expected: &'static str },
    TrailingInput(String),
}

impl fmt::Display for ParseErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParseErrorKind::UnexpectedChar(c) => write!(f, "unexpected character {c:?}"),
            ParseErrorKind::UnexpectedToken { found, expected } => {
                write!(f, "expected {expected}, found {found:?}")
            }
            ParseErrorKind::UnexpectedEnd { expected } => {
                write!(f, "expected {expected}, found end of input")
            }
            ParseErrorKind::TrailingInput(t) => write!(f, "unexpected trailing input {t:?}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Token {
    Ident(String),
    Not,
    And,
    Or,
    Arrow,
    Necessarily,
    Possibly,
    LParen,
    RParen,
}

impl Token {
    fn text(&self) -> String {
        match self {
            Token::Ident(s) => s.clone(),
            Token::Not => "!".into(),
            Token::And => "&".into(),
            Token::Or => "|".into(),
            Token::Arrow => "->".into(),
            Token::Necessarily => "[]".into(),
            Token::Possibly => "<>".into(),
            Token::LParen => "(".into(),
            Token::RParen => ")".into(),
        }
    }
}

fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

fn is_ident_continue(c: char) -> bool {
    c.is_ascii_alphanumeric() || matches!(c, '_' | '.' | '\'')
}

fn tokenize(input: &str) -> Result<Vec<(usize, Token)>, ParseError> {
    let chars: Vec<char> = input.chars().collect();
    let mut tokens = Vec::new();
    let mut i = 0;
    let pair = |i: usize, second: char| chars.get(i + 1) == Some(&second);
    while i < chars.len() {
        let c = chars[i];
        let start = i;
        let token = match c {
            c if c.is_whitespace() => {
                i += 1;
                continue;
            }
            '!' => Token::Not,
            '&' => Token::And,
            '|' => Token::Or,
            '(' => Token::LParen,
            ')' => Token::RParen,
            '-' if pair(i, '>') => {
                i += 1;
                Token::Arrow
            }
            '[' if pair(i, ']') => {
                i += 1;
                Token::Necessarily
            }
            '<' if pair(i, '>') => {
                i += 1;
                Token::Possibly
            }
            c if is_ident_start(c) => {
                while i + 1 < chars.len() && is_ident_continue(chars[i + 1]) {
                    i += 1;
                }
                Token::Ident(chars[start..=i].iter().collect())
            }
            other => {
                return Err(ParseError { offset: start, kind: ParseErrorKind::UnexpectedChar(other) })
            }
        };
        i += 1;
        tokens.push((start, token));
    }
    Ok(tokens)
}

struct Parser {
    tokens: Vec<(usize, Token)>,
    pos: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos).map(|(_, t)| t)
    }

    fn offset(&self) -> usize {
        self.tokens.get(self.pos).map_or(self.end, |(o, _)| *o)
    }

    fn eat(&mut self, token: &Token) -> bool {
        if self.peek() == Some(token) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn error(&self, expected: &'static str) -> ParseError {
        let kind = match self.peek() {
            Some(t) => ParseErrorKind::UnexpectedToken { found: t.text(), expected },
            None => ParseErrorKind::UnexpectedEnd { expected },
        };
        ParseError { offset: self.offset(), kind }
    }

    fn implication(&mut self) -> Result<Formula, ParseError> {
        let lhs = self.disjunction()?;
        if self.eat(&Token::Arrow) {
            let rhs = self.implication()?;
            return Ok(lhs.implies(rhs));
        }
        Ok(lhs)
    }

    fn disjunction(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.conjunction()?;
        while self.eat(&Token::Or) {
            lhs = lhs.or(self.conjunction()?);
        }
        Ok(lhs)
    }

    fn conjunction(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.unary()?;
        while self.eat(&Token::And) {
            lhs = lhs.and(self.unary()?);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Formula, ParseError> {
        if self.eat(&Token::Not) {
            return Ok(self.unary()?.not());
        }
        if self.eat(&Token::Necessarily) {
            return Ok(self.unary()?.necessarily());
        }
        if self.eat(&Token::Possibly) {
            return Ok(self.unary()?.possibly());
        }
        self.primary()
    }

    fn primary(&mut self) -> Result<Formula, ParseError> {
        match self.peek() {
            Some(Token::Ident(name)) => {
                let f = Formula::atom(name.clone());
                self.pos += 1;
                Ok(f)
            }
            Some(Token::LParen) => {
                self.pos += 1;
                let inner = self.implication()?;
                if !self.eat(&Token::RParen) {
                    return Err(self.error("')'"));
                }
                Ok(inner)
            }
            _ => Err(self.error("an atom, '(' or a unary operator")),
        }
    }
}

/// Parses a formula such as `[](B -> C)` or `!<>!p & q`.
pub fn parse_formula(input: &str) -> Result<Formula, ParseError> {
    let tokens = tokenize(input)?;
    let mut parser = Parser { tokens, pos: 0, end: input.chars().count() };
    let formula = parser.implication()?;
    if let Some(t) = parser.peek() {
        return Err(ParseError {
            offset: parser.offset(),
            kind: ParseErrorKind::TrailingInput(t.text()),
        });
    }
    Ok(formula)
}

impl std::str::FromStr for Formula {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_formula(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(x: &str) -> Formula {
        Formula::atom(x)
    }

    #[test]
    fn precedence_and_associativity() {
        assert_eq!(parse_formula("[](B -> C)").unwrap(), p("B").implies(p("C")).necessarily());
        assert_eq!(
            parse_formula("a -> b -> c").unwrap(),
            p("a").implies(p("b").implies(p("c")))
        );
        assert_eq!(
            parse_formula("a | b & c").unwrap(),
            p("a").or(p("b").and(p("c")))
        );
        assert_eq!(
            parse_formula("a & b | c -> d").unwrap(),
            p("a").and(p("b")).or(p("c")).implies(p("d"))
        );
        assert_eq!(parse_formula("!a & b").unwrap(), p("a").not().and(p("b")));
        assert_eq!(parse_formula("[]a & <>b").unwrap(), p("a").necessarily().and(p("b").possibly()));
        assert_eq!(parse_formula("a & b & c").unwrap(), p("a").and(p("b")).and(p("c")));
        assert_eq!(parse_formula("<>[]!x").unwrap(), p("x").not().necessarily().possibly());
    }

    #[test]
    fn the_probable_case_conjunction() {
        let f = parse_formula("![](B -> C) & <>(B -> C) & <>(B -> !C)").unwrap();
        let bc = || p("B").implies(p("C"));
        assert_eq!(
            f,
            bc().necessarily().not().and(bc().possibly()).and(p("B").implies(p("C").not()).possibly())
        );
    }

    #[test]
    fn identifiers() {
        assert_eq!(parse_formula("  B_done'  ").unwrap(), p("B_done'"));
        assert_eq!(parse_formula("policy_A.x").unwrap(), p("policy_A.x"));
    }

    #[test]
    fn error_offsets() {
        let e = parse_formula("a & ").unwrap_err();
        assert_eq!(e.offset, 4);
        assert!(matches!(e.kind, ParseErrorKind::UnexpectedEnd { .. }));

        let e = parse_formula("(a | b").unwrap_err();
        assert_eq!(e.offset, 6);

        let e = parse_formula("a # b").unwrap_err();
        assert_eq!(e, ParseError { offset: 2, kind: ParseErrorKind::UnexpectedChar('#') });

        let e = parse_formula("a b").unwrap_err();
        assert_eq!(e.offset, 2);
        assert!(matches!(e.kind, ParseErrorKind::TrailingInput(_)));

        let e = parse_formula("a - b").unwrap_err();
        assert_eq!(e.offset, 2);

        let e = parse_formula("é & )").unwrap_err();
        assert_eq!(e.offset, 0);

        let e = parse_formula("ab & )").unwrap_err();
        assert_eq!(e.offset, 5);
        assert!(e.to_string().contains("offset 5"));

        assert_eq!(parse_formula("").unwrap_err().offset, 0);
        assert_eq!(parse_formula("[ ]p").unwrap_err().offset, 0);
    }
}
