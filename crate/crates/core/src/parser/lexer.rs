//! Tokenizer for the textual QIR dialect.
//!
//! `%q` and `%Qubit` come out as the same token kind; whether a percent
//! identifier is a value or a type is decided by the parser from context.

use super::ParseError;
use crate::ast::SourceSpan;

#[derive(Clone, Debug, PartialEq)]
pub enum TokenKind {
    /// Bare word: keywords, labels, `i64`, icmp predicates.
    Word(String),
    /// `@name`
    Global(String),
    /// `%name` — local value or type name.
    Percent(String),
    /// Decimal integer literal, possibly negative.
    Int(i128),
    /// Floating literal kept as written; converted during parsing.
    Float(String),
    /// `0x<hex>` — used for doubles encoded as raw bits.
    Hex(u64),
    /// Double-quoted string.
    Str(String),
    /// Single punctuation character: `= , ( ) { } [ ] * : ! #`.
    Punct(char),
}

impl TokenKind {
    pub fn describe(&self) -> String {
        match self {
            TokenKind::Word(w) => format!("\"{w}\""),
            TokenKind::Global(g) => format!("@{g}"),
            TokenKind::Percent(p) => format!("%{p}"),
            TokenKind::Int(_) => "integer".to_string(),
            TokenKind::Float(_) => "float".to_string(),
            TokenKind::Hex(_) => "hex literal".to_string(),
            TokenKind::Str(_) => "string".to_string(),
            TokenKind::Punct(c) => format!("'{c}'"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Token {
    pub kind: TokenKind,
    pub lexeme: String,
    pub span: SourceSpan,
}

struct Cursor<'a> {
    rest: std::str::CharIndices<'a>,
    src: &'a str,
    line: u32,
    col: u32,
}

impl<'a> Cursor<'a> {
    fn new(src: &'a str) -> Self {
        Self {
            rest: src.char_indices(),
            src,
            line: 1,
            col: 1,
        }
    }

    fn peek(&self) -> Option<char> {
        self.rest.clone().next().map(|(_, c)| c)
    }

    fn peek2(&self) -> Option<char> {
        self.rest.clone().nth(1).map(|(_, c)| c)
    }

    fn bump(&mut self) -> Option<char> {
        let (_, c) = self.rest.next()?;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn offset(&self) -> usize {
        self.rest
            .clone()
            .next()
            .map(|(i, _)| i)
            .unwrap_or(self.src.len())
    }
}

fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || matches!(c, '_' | '.' | '$' | '-')
}

fn is_ident_continue(c: char) -> bool {
    c.is_ascii_alphanumeric() || matches!(c, '_' | '.' | '$' | '-')
}

/// Tokenizes the whole input. Comments (`;` to end of line) and whitespace
/// are skipped; everything else must form a token or the lex fails.
pub fn lex(source: &str) -> Result<Vec<Token>, ParseError> {
    let mut cursor = Cursor::new(source);
    let mut tokens = Vec::new();

    loop {
        // Skip whitespace and comments.
        loop {
            match cursor.peek() {
                Some(c) if c.is_whitespace() => {
                    cursor.bump();
                }
                Some(';') => {
                    while let Some(c) = cursor.peek() {
                        if c == '\n' {
                            break;
                        }
                        cursor.bump();
                    }
                }
                _ => break,
            }
        }

        let Some(c) = cursor.peek() else { break };
        let start_line = cursor.line;
        let start_col = cursor.col;
        let start_off = cursor.offset();

        let kind = match c {
            '@' | '%' => {
                let sigil = cursor.bump().unwrap();
                let name = lex_name(&mut cursor, start_line, start_col)?;
                if sigil == '@' {
                    TokenKind::Global(name)
                } else {
                    TokenKind::Percent(name)
                }
            }
            '"' => TokenKind::Str(lex_string(&mut cursor, start_line, start_col)?),
            '=' | ',' | '(' | ')' | '{' | '}' | '[' | ']' | '*' | ':' | '!' | '#' => {
                cursor.bump();
                TokenKind::Punct(c)
            }
            '-' => {
                cursor.bump();
                if cursor.peek().is_some_and(|d| d.is_ascii_digit()) {
                    lex_number(&mut cursor, true)
                } else {
                    return Err(ParseError::illegal_char(
                        '-',
                        SourceSpan::new(start_line, start_col, start_col + 1),
                    ));
                }
            }
            d if d.is_ascii_digit() => lex_number(&mut cursor, false),
            s if is_ident_start(s) => {
                let mut word = String::new();
                while let Some(c) = cursor.peek() {
                    if is_ident_continue(c) {
                        word.push(c);
                        cursor.bump();
                    } else {
                        break;
                    }
                }
                TokenKind::Word(word)
            }
            other => {
                return Err(ParseError::illegal_char(
                    other,
                    SourceSpan::new(start_line, start_col, start_col + 1),
                ));
            }
        };

        let end_off = cursor.offset();
        tokens.push(Token {
            kind,
            lexeme: source[start_off..end_off].to_string(),
            span: SourceSpan::new(start_line, start_col, cursor.col),
        });
    }

    Ok(tokens)
}

fn lex_name(cursor: &mut Cursor, line: u32, col: u32) -> Result<String, ParseError> {
    if cursor.peek() == Some('"') {
        return lex_string(cursor, line, col);
    }
    let mut name = String::new();
    while let Some(c) = cursor.peek() {
        if is_ident_continue(c) {
            name.push(c);
            cursor.bump();
        } else {
            break;
        }
    }
    if name.is_empty() {
        return Err(ParseError::new(
            "expected a name after sigil",
            SourceSpan::new(line, col, col + 1),
        ));
    }
    Ok(name)
}

fn lex_string(cursor: &mut Cursor, line: u32, col: u32) -> Result<String, ParseError> {
    cursor.bump(); // opening quote
    let mut out = String::new();
    loop {
        match cursor.bump() {
            Some('"') => return Ok(out),
            Some('\n') | None => {
                return Err(ParseError::new(
                    "unterminated string literal",
                    SourceSpan::new(line, col, col + 1 + out.len() as u32),
                ));
            }
            Some(c) => out.push(c),
        }
    }
}

fn lex_number(cursor: &mut Cursor, negative: bool) -> TokenKind {
    let mut digits = String::new();
    if negative {
        digits.push('-');
    }

    // 0x... encodes a double as raw bits.
    if !negative && cursor.peek() == Some('0') && cursor.peek2() == Some('x') {
        cursor.bump();
        cursor.bump();
        let mut hex = String::new();
        while let Some(c) = cursor.peek() {
            if c.is_ascii_hexdigit() {
                hex.push(c);
                cursor.bump();
            } else {
                break;
            }
        }
        let bits = u64::from_str_radix(&hex, 16).unwrap_or(0);
        return TokenKind::Hex(bits);
    }

    while let Some(c) = cursor.peek() {
        if c.is_ascii_digit() {
            digits.push(c);
            cursor.bump();
        } else {
            break;
        }
    }

    let mut is_float = false;
    if cursor.peek() == Some('.') && cursor.peek2().is_some_and(|c| c.is_ascii_digit()) {
        is_float = true;
        digits.push('.');
        cursor.bump();
        while let Some(c) = cursor.peek() {
            if c.is_ascii_digit() {
                digits.push(c);
                cursor.bump();
            } else {
                break;
            }
        }
    }
    if matches!(cursor.peek(), Some('e') | Some('E')) {
        let mut probe = cursor.rest.clone();
        probe.next();
        let next = probe.clone().next().map(|(_, c)| c);
        let exp_ok = match next {
            Some('+') | Some('-') => probe.nth(1).is_some_and(|(_, c)| c.is_ascii_digit()),
            Some(c) => c.is_ascii_digit(),
            None => false,
        };
        if exp_ok {
            is_float = true;
            digits.push(cursor.bump().unwrap());
            if matches!(cursor.peek(), Some('+') | Some('-')) {
                digits.push(cursor.bump().unwrap());
            }
            while let Some(c) = cursor.peek() {
                if c.is_ascii_digit() {
                    digits.push(c);
                    cursor.bump();
                } else {
                    break;
                }
            }
        }
    }

    if is_float {
        TokenKind::Float(digits)
    } else {
        TokenKind::Int(digits.parse().unwrap_or(0))
    }
}
