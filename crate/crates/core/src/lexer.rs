//! Tokenizer for `.ldl` source text.

use crate::ast::Span;
use crate::parser::ParseError;

#[derive(Clone, Debug, PartialEq)]
pub enum Tok {
    Let,
    In,
    Lam,
    Forall,
    Exists,
    Network,
    TyReal,
    TyBool,
    TyVec,
    TyIndex,
    True,
    False,
    And,
    Or,
    Not,
    Implies,
    Plus,
    Minus,
    Star,
    EqEq,
    Neq,
    Leq,
    Geq,
    Lt,
    Gt,
    Bang,
    Colon,
    Dot,
    Arrow,
    Assign,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Ident(String),
    Nat(usize),
    RealLit(f64),
    Eof,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Nat(n) => format!("number `{n}`"),
            Tok::RealLit(r) => format!("number `{r:?}`"),
            Tok::Eof => "end of input".to_string(),
            other => format!("`{}`", other.spelling()),
        }
    }

    fn spelling(&self) -> &'static str {
        match self {
            Tok::Let => "let",
            Tok::In => "in",
            Tok::Lam => "lam",
            Tok::Forall => "forall",
            Tok::Exists => "exists",
            Tok::Network => "network",
            Tok::TyReal => "Real",
            Tok::TyBool => "Bool",
            Tok::TyVec => "Vec",
            Tok::TyIndex => "Index",
            Tok::True => "True",
            Tok::False => "False",
            Tok::And => "and",
            Tok::Or => "or",
            Tok::Not => "not",
            Tok::Implies => "=>",
            Tok::Plus => "+",
            Tok::Minus => "-",
            Tok::Star => "*",
            Tok::EqEq => "==",
            Tok::Neq => "!=",
            Tok::Leq => "<=",
            Tok::Geq => ">=",
            Tok::Lt => "<",
            Tok::Gt => ">",
            Tok::Bang => "!",
            Tok::Colon => ":",
            Tok::Dot => ".",
            Tok::Arrow => "->",
            Tok::Assign => "=",
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::LBracket => "[",
            Tok::RBracket => "]",
            Tok::Comma => ",",
            Tok::Ident(_) | Tok::Nat(_) | Tok::RealLit(_) | Tok::Eof => "",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Token {
    pub tok: Tok,
    pub span: Span,
}

pub const KEYWORDS: [&str; 15] = [
    "let", "in", "lam", "forall", "exists", "network", "Real", "Bool", "Vec", "Index", "True",
    "False", "and", "or", "not",
];

pub fn is_keyword(s: &str) -> bool {
    KEYWORDS.contains(&s)
}

fn keyword(s: &str) -> Option<Tok> {
    Some(match s {
        "let" => Tok::Let,
        "in" => Tok::In,
        "lam" => Tok::Lam,
        "forall" => Tok::Forall,
        "exists" => Tok::Exists,
        "network" => Tok::Network,
        "Real" => Tok::TyReal,
        "Bool" => Tok::TyBool,
        "Vec" => Tok::TyVec,
        "Index" => Tok::TyIndex,
        "True" => Tok::True,
        "False" => Tok::False,
        "and" => Tok::And,
        "or" => Tok::Or,
        "not" => Tok::Not,
        _ => return None,
    })
}

fn ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

fn ident_continue(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '\''
}

struct Cursor<'a> {
    chars: Vec<(usize, char)>,
    src: &'a str,
    pos: usize,
    line: u32,
    col: u32,
}

impl Cursor<'_> {
    fn peek(&self, k: usize) -> Option<char> {
        self.chars.get(self.pos + k).map(|&(_, c)| c)
    }

    fn offset(&self) -> usize {
        self.chars
            .get(self.pos)
            .map(|&(o, _)| o)
            .unwrap_or(self.src.len())
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek(0)?;
        self.pos += 1;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }
}

/// Splits source text into tokens using maximal munch. The stream always
/// ends with `Tok::Eof`.
pub fn tokenize(source: &str) -> Result<Vec<Token>, ParseError> {
    let mut cur = Cursor {
        chars: source.char_indices().collect(),
        src: source,
        pos: 0,
        line: 1,
        col: 1,
    };
    let mut out = Vec::new();
    loop {
        // whitespace and comments
        while let Some(c) = cur.peek(0) {
            if c.is_whitespace() {
                cur.bump();
            } else if c == '-' && cur.peek(1) == Some('-') {
                while let Some(c) = cur.peek(0) {
                    if c == '\n' {
                        break;
                    }
                    cur.bump();
                }
            } else {
                break;
            }
        }
        let (start, line, col) = (cur.offset(), cur.line, cur.col);
        let Some(c) = cur.peek(0) else {
            out.push(Token {
                tok: Tok::Eof,
                span: Span {
                    start,
                    end: start,
                    line,
                    col,
                },
            });
            return Ok(out);
        };
        let tok = if ident_start(c) {
            let mut s = String::new();
            while let Some(c) = cur.peek(0).filter(|&c| ident_continue(c)) {
                s.push(c);
                cur.bump();
            }
            keyword(&s).unwrap_or(Tok::Ident(s))
        } else if c.is_ascii_digit() {
            lex_number(&mut cur)?
        } else {
            let two = cur.peek(1);
            let (tok, len) = match (c, two) {
                ('=', Some('>')) => (Tok::Implies, 2),
                ('=', Some('=')) => (Tok::EqEq, 2),
                ('!', Some('=')) => (Tok::Neq, 2),
                ('<', Some('=')) => (Tok::Leq, 2),
                ('>', Some('=')) => (Tok::Geq, 2),
                ('-', Some('>')) => (Tok::Arrow, 2),
                ('=', _) => (Tok::Assign, 1),
                ('!', _) => (Tok::Bang, 1),
                ('<', _) => (Tok::Lt, 1),
                ('>', _) => (Tok::Gt, 1),
                ('-', _) => (Tok::Minus, 1),
                ('+', _) => (Tok::Plus, 1),
                ('*', _) => (Tok::Star, 1),
                (':', _) => (Tok::Colon, 1),
                ('.', _) => (Tok::Dot, 1),
                ('(', _) => (Tok::LParen, 1),
                (')', _) => (Tok::RParen, 1),
                ('[', _) => (Tok::LBracket, 1),
                (']', _) => (Tok::RBracket, 1),
                (',', _) => (Tok::Comma, 1),
                _ => return Err(ParseError::IllegalCharacter { ch: c, line, col }),
            };
            for _ in 0..len {
                cur.bump();
            }
            tok
        };
        out.push(Token {
            tok,
            span: Span {
                start,
                end: cur.offset(),
                line,
                col,
            },
        });
    }
}

fn lex_number(cur: &mut Cursor<'_>) -> Result<Tok, ParseError> {
    let (line, col) = (cur.line, cur.col);
    let mut s = String::new();
    let mut is_real = false;
    let digits = |cur: &mut Cursor<'_>, s: &mut String| {
        while let Some(c) = cur.peek(0).filter(char::is_ascii_digit) {
            s.push(c);
            cur.bump();
        }
    };
    digits(cur, &mut s);
    if cur.peek(0) == Some('.') && cur.peek(1).is_some_and(|c| c.is_ascii_digit()) {
        is_real = true;
        s.push('.');
        cur.bump();
        digits(cur, &mut s);
    }
    if matches!(cur.peek(0), Some('e' | 'E')) {
        let sign = matches!(cur.peek(1), Some('+' | '-'));
        let digit_at = if sign { 2 } else { 1 };
        if cur.peek(digit_at).is_some_and(|c| c.is_ascii_digit()) {
            is_real = true;
            s.push('e');
            cur.bump();
            if sign {
                s.push(cur.bump().unwrap_or('+'));
            }
            digits(cur, &mut s);
        }
    }
    if is_real {
        s.parse::<f64>()
            .map(Tok::RealLit)
            .map_err(|e| ParseError::Syntax {
                message: format!("bad real literal `{s}`: {e}"),
                line,
                col,
            })
    } else {
        s.parse::<usize>()
            .map(Tok::Nat)
            .map_err(|e| ParseError::Syntax {
                message: format!("bad natural literal `{s}`: {e}"),
                line,
                col,
            })
    }
}
