use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    LParen,
    RParen,
    Comma,
    Colon,
    Semi,
    Dot,
    Amp,
    Pipe,
    Bang,
    Arrow,
    Iff,
    Eq,
    Neq,
    If,
    Eof,
}

#[derive(Clone, Debug)]
pub struct Token {
    pub tok: Tok,
    pub line: usize,
    pub col: usize,
}

pub fn lex(text: &str) -> Result<Vec<Token>> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0, 1, 1);
    while i < chars.len() {
        let c = chars[i];
        let (tl, tc) = (line, col);
        let mut push = |tok: Tok, len: usize, i: &mut usize, col: &mut usize| {
            out.push(Token { tok, line: tl, col: tc });
            *i += len;
            *col += len;
        };
        match c {
            '\n' => {
                i += 1;
                line += 1;
                col = 1;
            }
            c if c.is_whitespace() => {
                i += 1;
                col += 1;
            }
            '%' => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
            }
            '(' => push(Tok::LParen, 1, &mut i, &mut col),
            ')' => push(Tok::RParen, 1, &mut i, &mut col),
            ',' => push(Tok::Comma, 1, &mut i, &mut col),
            ';' => push(Tok::Semi, 1, &mut i, &mut col),
            '.' => push(Tok::Dot, 1, &mut i, &mut col),
            '&' => push(Tok::Amp, 1, &mut i, &mut col),
            '|' => push(Tok::Pipe, 1, &mut i, &mut col),
            '=' => push(Tok::Eq, 1, &mut i, &mut col),
            ':' if chars.get(i + 1) == Some(&'-') => push(Tok::If, 2, &mut i, &mut col),
            ':' => push(Tok::Colon, 1, &mut i, &mut col),
            '!' if chars.get(i + 1) == Some(&'=') => push(Tok::Neq, 2, &mut i, &mut col),
            '!' => push(Tok::Bang, 1, &mut i, &mut col),
            '-' if chars.get(i + 1) == Some(&'>') => push(Tok::Arrow, 2, &mut i, &mut col),
            '<' if chars.get(i + 1) == Some(&'-') && chars.get(i + 2) == Some(&'>') => {
                push(Tok::Iff, 3, &mut i, &mut col)
            }
            c if c.is_alphanumeric() || c == '_' => {
                let start = i;
                while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                while i < chars.len() && chars[i] == '\'' {
                    i += 1;
                }
                let s: String = chars[start..i].iter().collect();
                col += i - start;
                out.push(Token {
                    tok: Tok::Ident(s),
                    line: tl,
                    col: tc,
                });
            }
            other => {
                return Err(Error::Parse {
                    line,
                    col,
                    msg: format!("unexpected character `{other}`"),
                })
            }
        }
    }
    out.push(Token { tok: Tok::Eof, line, col });
    Ok(out)
}
