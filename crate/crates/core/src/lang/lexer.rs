use super::ParseError;

#[derive(Debug, Clone, PartialEq)]
pub enum TokKind {
    Ident(String),
    Int(i64),
    Float(f64),
    Param(String),
    KwVar,
    KwSkip,
    KwChoose,
    KwOr,
    KwRo,
    KwIf,
    KwThen,
    KwElse,
    KwFi,
    KwWhile,
    KwDo,
    KwOd,
    KwTrue,
    KwFalse,
    Assign,
    Random,
    Semi,
    Colon,
    Comma,
    LBrace,
    RBrace,
    LParen,
    RParen,
    At,
    Plus,
    Minus,
    Star,
    Percent,
    EqEq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    AndAnd,
    OrOr,
    Bang,
    Eof,
}

impl TokKind {
    pub fn describe(&self) -> String {
        match self {
            TokKind::Ident(s) => format!("identifier '{s}'"),
            TokKind::Int(v) => format!("integer {v}"),
            TokKind::Float(v) => format!("number {v}"),
            TokKind::Param(s) => format!("parameter '#{s}'"),
            TokKind::Eof => "end of input".into(),
            other => format!("'{}'", other.symbol()),
        }
    }

    fn symbol(&self) -> &'static str {
        match self {
            TokKind::KwVar => "var",
            TokKind::KwSkip => "skip",
            TokKind::KwChoose => "choose",
            TokKind::KwOr => "or",
            TokKind::KwRo => "ro",
            TokKind::KwIf => "if",
            TokKind::KwThen => "then",
            TokKind::KwElse => "else",
            TokKind::KwFi => "fi",
            TokKind::KwWhile => "while",
            TokKind::KwDo => "do",
            TokKind::KwOd => "od",
            TokKind::KwTrue => "true",
            TokKind::KwFalse => "false",
            TokKind::Assign => ":=",
            TokKind::Random => "?=",
            TokKind::Semi => ";",
            TokKind::Colon => ":",
            TokKind::Comma => ",",
            TokKind::LBrace => "{",
            TokKind::RBrace => "}",
            TokKind::LParen => "(",
            TokKind::RParen => ")",
            TokKind::At => "@",
            TokKind::Plus => "+",
            TokKind::Minus => "-",
            TokKind::Star => "*",
            TokKind::Percent => "%",
            TokKind::EqEq => "==",
            TokKind::Ne => "!=",
            TokKind::Lt => "<",
            TokKind::Le => "<=",
            TokKind::Gt => ">",
            TokKind::Ge => ">=",
            TokKind::AndAnd => "&&",
            TokKind::OrOr => "||",
            TokKind::Bang => "!",
            _ => unreachable!(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Token {
    pub kind: TokKind,
    pub line: u32,
    pub col: u32,
}

pub fn tokenize(source: &str) -> Result<Vec<Token>, ParseError> {
    let mut tokens = Vec::new();
    let chars: Vec<char> = source.chars().collect();
    let mut pos = 0;
    let mut line = 1u32;
    let mut col = 1u32;

    let err = |line: u32, col: u32, message: String| ParseError::Syntax { line, col, message };

    while pos < chars.len() {
        let c = chars[pos];
        let (tline, tcol) = (line, col);
        let advance = |pos: &mut usize, col: &mut u32| {
            *pos += 1;
            *col += 1;
        };
        match c {
            '\n' => {
                pos += 1;
                line += 1;
                col = 1;
            }
            c if c.is_whitespace() => advance(&mut pos, &mut col),
            '/' if chars.get(pos + 1) == Some(&'/') => {
                while pos < chars.len() && chars[pos] != '\n' {
                    pos += 1;
                }
            }
            c if c.is_ascii_digit() => {
                let start = pos;
                while pos < chars.len() && chars[pos].is_ascii_digit() {
                    advance(&mut pos, &mut col);
                }
                let mut is_float = false;
                if pos < chars.len()
                    && chars[pos] == '.'
                    && chars.get(pos + 1).is_some_and(char::is_ascii_digit)
                {
                    is_float = true;
                    advance(&mut pos, &mut col);
                    while pos < chars.len() && chars[pos].is_ascii_digit() {
                        advance(&mut pos, &mut col);
                    }
                }
                let text: String = chars[start..pos].iter().collect();
                let kind = if is_float {
                    TokKind::Float(
                        text.parse()
                            .map_err(|_| err(tline, tcol, format!("bad number '{text}'")))?,
                    )
                } else {
                    TokKind::Int(
                        text.parse()
                            .map_err(|_| err(tline, tcol, format!("integer '{text}' overflows")))?,
                    )
                };
                tokens.push(Token {
                    kind,
                    line: tline,
                    col: tcol,
                });
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let start = pos;
                while pos < chars.len() && (chars[pos].is_ascii_alphanumeric() || chars[pos] == '_')
                {
                    advance(&mut pos, &mut col);
                }
                let word: String = chars[start..pos].iter().collect();
                let kind = match word.as_str() {
                    "var" => TokKind::KwVar,
                    "skip" => TokKind::KwSkip,
                    "choose" => TokKind::KwChoose,
                    "or" => TokKind::KwOr,
                    "ro" => TokKind::KwRo,
                    "if" => TokKind::KwIf,
                    "then" => TokKind::KwThen,
                    "else" => TokKind::KwElse,
                    "fi" => TokKind::KwFi,
                    "while" => TokKind::KwWhile,
                    "do" => TokKind::KwDo,
                    "od" => TokKind::KwOd,
                    "true" => TokKind::KwTrue,
                    "false" => TokKind::KwFalse,
                    _ => TokKind::Ident(word),
                };
                tokens.push(Token {
                    kind,
                    line: tline,
                    col: tcol,
                });
            }
            '#' => {
                advance(&mut pos, &mut col);
                let start = pos;
                while pos < chars.len() && (chars[pos].is_ascii_alphanumeric() || chars[pos] == '_')
                {
                    advance(&mut pos, &mut col);
                }
                if start == pos {
                    return Err(err(tline, tcol, "expected parameter name after '#'".into()));
                }
                let name: String = chars[start..pos].iter().collect();
                tokens.push(Token {
                    kind: TokKind::Param(name),
                    line: tline,
                    col: tcol,
                });
            }
            _ => {
                let two: String = chars[pos..chars.len().min(pos + 2)].iter().collect();
                let (kind, len) = match two.as_str() {
                    ":=" => (TokKind::Assign, 2),
                    "?=" => (TokKind::Random, 2),
                    "==" => (TokKind::EqEq, 2),
                    "!=" => (TokKind::Ne, 2),
                    "<=" => (TokKind::Le, 2),
                    ">=" => (TokKind::Ge, 2),
                    "&&" => (TokKind::AndAnd, 2),
                    "||" => (TokKind::OrOr, 2),
                    _ => match c {
                        ';' => (TokKind::Semi, 1),
                        ':' => (TokKind::Colon, 1),
                        ',' => (TokKind::Comma, 1),
                        '{' => (TokKind::LBrace, 1),
                        '}' => (TokKind::RBrace, 1),
                        '(' => (TokKind::LParen, 1),
                        ')' => (TokKind::RParen, 1),
                        '@' => (TokKind::At, 1),
                        '+' => (TokKind::Plus, 1),
                        '-' => (TokKind::Minus, 1),
                        '*' => (TokKind::Star, 1),
                        '%' => (TokKind::Percent, 1),
                        '<' => (TokKind::Lt, 1),
                        '>' => (TokKind::Gt, 1),
                        '!' => (TokKind::Bang, 1),
                        other => {
                            return Err(err(tline, tcol, format!("unexpected character '{other}'")))
                        }
                    },
                };
                pos += len;
                col += len as u32;
                tokens.push(Token {
                    kind,
                    line: tline,
                    col: tcol,
                });
            }
        }
    }
    tokens.push(Token {
        kind: TokKind::Eof,
        line,
        col,
    });
    Ok(tokens)
}
