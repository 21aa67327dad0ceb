//! Constraint-file parser.
//!
//! Grammar (whitespace-insensitive between tokens):
//!
//! ```text
//! file       := line*
//! line       := constraint | comment | blank
//! comment    := "#" anything
//! constraint := expr "=" NUMBER
//! expr       := term (("+"|"-") term)*
//! term       := [coef "*"] atom
//! coef       := NUMBER | "sqrt2" | "1/sqrt2"
//! atom       := PAULI PAULI | "P[" BELL "]"
//! PAULI      := "I" | "X" | "Y" | "Z"
//! BELL       := "PSI-" | "PSI+" | "PHI-" | "PHI+"
//! NUMBER     := decimal float
//! ```

use std::fmt;

use mininfer::linalg::{kron, ComplexMatrix};
use mininfer::quantum::{pauli, BellBasis, BellState, Observable};
use mininfer::ConstraintSet;

#[derive(Debug)]
pub struct SyntaxError {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

impl fmt::Display for SyntaxError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "syntax error at line {}, column {}: {}",
            self.line, self.col, self.message
        )
    }
}

impl std::error::Error for SyntaxError {}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Number(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Equals,
    LBracket,
    RBracket,
}

impl Token {
    fn describe(&self) -> String {
        match self {
            Token::Number(v) => format!("number {v}"),
            Token::Ident(s) => format!("'{s}'"),
            Token::Plus => "'+'".into(),
            Token::Minus => "'-'".into(),
            Token::Star => "'*'".into(),
            Token::Slash => "'/'".into(),
            Token::Equals => "'='".into(),
            Token::LBracket => "'['".into(),
            Token::RBracket => "']'".into(),
        }
    }
}

struct Lexer<'a> {
    line: usize,
    chars: Vec<char>,
    pos: usize,
    text: &'a str,
}

impl<'a> Lexer<'a> {
    fn new(line: usize, text: &'a str) -> Self {
        Self {
            line,
            chars: text.chars().collect(),
            pos: 0,
            text,
        }
    }

    fn error(&self, col: usize, message: impl Into<String>) -> SyntaxError {
        SyntaxError {
            line: self.line,
            col,
            message: message.into(),
        }
    }

    fn tokens(&mut self) -> Result<Vec<(Token, usize)>, SyntaxError> {
        let mut out = Vec::new();
        while self.pos < self.chars.len() {
            let c = self.chars[self.pos];
            let col = self.pos + 1;
            match c {
                ' ' | '\t' | '\r' => {
                    self.pos += 1;
                }
                '#' => break,
                '+' => {
                    out.push((Token::Plus, col));
                    self.pos += 1;
                }
                '-' => {
                    out.push((Token::Minus, col));
                    self.pos += 1;
                }
                '*' => {
                    out.push((Token::Star, col));
                    self.pos += 1;
                }
                '/' => {
                    out.push((Token::Slash, col));
                    self.pos += 1;
                }
                '=' => {
                    out.push((Token::Equals, col));
                    self.pos += 1;
                }
                '[' => {
                    out.push((Token::LBracket, col));
                    self.pos += 1;
                }
                ']' => {
                    out.push((Token::RBracket, col));
                    self.pos += 1;
                }
                '0'..='9' | '.' => {
                    let start = self.pos;
                    while self.pos < self.chars.len()
                        && matches!(self.chars[self.pos], '0'..='9' | '.')
                    {
                        self.pos += 1;
                    }
                    // Exponent part of a float literal.
                    if self.pos < self.chars.len() && matches!(self.chars[self.pos], 'e' | 'E') {
                        let mut probe = self.pos + 1;
                        if probe < self.chars.len() && matches!(self.chars[probe], '+' | '-') {
                            probe += 1;
                        }
                        if probe < self.chars.len() && self.chars[probe].is_ascii_digit() {
                            self.pos = probe;
                            while self.pos < self.chars.len()
                                && self.chars[self.pos].is_ascii_digit()
                            {
                                self.pos += 1;
                            }
                        }
                    }
                    let lit: String = self.chars[start..self.pos].iter().collect();
                    let value = lit
                        .parse::<f64>()
                        .map_err(|_| self.error(col, format!("bad number '{lit}'")))?;
                    out.push((Token::Number(value), col));
                }
                c if c.is_ascii_alphabetic() => {
                    let start = self.pos;
                    while self.pos < self.chars.len()
                        && (self.chars[self.pos].is_ascii_alphanumeric())
                    {
                        self.pos += 1;
                    }
                    let word: String = self.chars[start..self.pos].iter().collect();
                    out.push((Token::Ident(word), col));
                }
                other => {
                    return Err(self.error(col, format!("unexpected character '{other}'")));
                }
            }
        }
        let _ = self.text;
        Ok(out)
    }
}

struct LineParser {
    line: usize,
    tokens: Vec<(Token, usize)>,
    pos: usize,
    end_col: usize,
}

impl LineParser {
    fn error(&self, message: impl Into<String>) -> SyntaxError {
        let col = self
            .tokens
            .get(self.pos)
            .map(|t| t.1)
            .unwrap_or(self.end_col);
        SyntaxError {
            line: self.line,
            col,
            message: message.into(),
        }
    }

    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos).map(|t| &t.0)
    }

    fn next(&mut self, expected: &str) -> Result<Token, SyntaxError> {
        let tok = self
            .tokens
            .get(self.pos)
            .cloned()
            .ok_or_else(|| self.error(format!("expected {expected}, found end of line")))?;
        self.pos += 1;
        Ok(tok.0)
    }

    fn expect(&mut self, want: Token, expected: &str) -> Result<(), SyntaxError> {
        let got = self.next(expected)?;
        if got != want {
            self.pos -= 1;
            return Err(self.error(format!("expected {expected}, found {}", got.describe())));
        }
        Ok(())
    }

    /// coef := NUMBER | "sqrt2" | "1/sqrt2"
    fn coefficient(&mut self) -> Result<f64, SyntaxError> {
        match self.next("a coefficient")? {
            Token::Number(v) => {
                // "1/sqrt2" lexes as NUMBER '/' IDENT.
                if self.peek() == Some(&Token::Slash) {
                    self.pos += 1;
                    if v != 1.0 {
                        self.pos -= 2;
                        return Err(
                            self.error("only '1/sqrt2' is allowed as a quotient coefficient")
                        );
                    }
                    match self.next("'sqrt2'")? {
                        Token::Ident(w) if w == "sqrt2" => Ok(1.0 / 2.0_f64.sqrt()),
                        other => {
                            self.pos -= 1;
                            Err(self.error(format!("expected 'sqrt2', found {}", other.describe())))
                        }
                    }
                } else {
                    Ok(v)
                }
            }
            Token::Ident(w) if w == "sqrt2" => Ok(2.0_f64.sqrt()),
            other => {
                self.pos -= 1;
                Err(self.error(format!(
                    "expected a coefficient, found {}",
                    other.describe()
                )))
            }
        }
    }

    /// atom := PAULI PAULI | "P[" BELL "]"
    fn atom(&mut self) -> Result<ComplexMatrix, SyntaxError> {
        match self.next("an observable")? {
            Token::Ident(word) => {
                if word == "P" && self.peek() == Some(&Token::LBracket) {
                    self.pos += 1;
                    let family = match self.next("'PSI' or 'PHI'")? {
                        Token::Ident(w) if w == "PSI" || w == "PHI" => w,
                        other => {
                            self.pos -= 1;
                            return Err(self.error(format!(
                                "expected 'PSI' or 'PHI', found {}",
                                other.describe()
                            )));
                        }
                    };
                    let sign = match self.next("'+' or '-'")? {
                        Token::Plus => "+",
                        Token::Minus => "-",
                        other => {
                            self.pos -= 1;
                            return Err(self.error(format!(
                                "expected '+' or '-', found {}",
                                other.describe()
                            )));
                        }
                    };
                    self.expect(Token::RBracket, "']'")?;
                    let label = format!("{family}{sign}");
                    let state = BellState::from_label(&label)
                        .expect("family and sign combinations are exhaustive");
                    Ok(BellBasis::get().projector(state).clone())
                } else if word.len() == 2 {
                    let mut letters = word.chars();
                    let first = letters.next().unwrap();
                    let second = letters.next().unwrap();
                    let (a, b) = match (pauli::by_label(first), pauli::by_label(second)) {
                        (Some(a), Some(b)) => (a, b),
                        _ => {
                            self.pos -= 1;
                            return Err(self.error(format!(
                                "'{word}' is not a Pauli pair (letters I, X, Y, Z)"
                            )));
                        }
                    };
                    Ok(kron(&a, &b).expect("Pauli operators are 2x2"))
                } else {
                    self.pos -= 1;
                    Err(self.error(format!(
                        "'{word}' is not an observable (Pauli pair or P[...])"
                    )))
                }
            }
            other => {
                self.pos -= 1;
                Err(self.error(format!(
                    "expected an observable, found {}",
                    other.describe()
                )))
            }
        }
    }

    /// term := [coef "*"] atom
    fn term(&mut self) -> Result<ComplexMatrix, SyntaxError> {
        let has_coef = match self.peek() {
            Some(Token::Number(_)) => true,
            // 'sqrt2' is a coefficient; any other ident starts an atom.
            Some(Token::Ident(w)) => w == "sqrt2",
            _ => false,
        };
        if has_coef {
            let coef = self.coefficient()?;
            self.expect(Token::Star, "'*'")?;
            Ok(self.atom()?.scale_re(coef))
        } else {
            self.atom()
        }
    }

    /// expr := term (("+"|"-") term)*
    fn expr(&mut self) -> Result<ComplexMatrix, SyntaxError> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Some(Token::Plus) => {
                    self.pos += 1;
                    acc = acc.add(&self.term()?);
                }
                Some(Token::Minus) => {
                    self.pos += 1;
                    acc = acc.sub(&self.term()?);
                }
                _ => return Ok(acc),
            }
        }
    }

    /// constraint := expr "=" NUMBER
    fn constraint(&mut self) -> Result<(ComplexMatrix, f64), SyntaxError> {
        let matrix = self.expr()?;
        self.expect(Token::Equals, "'='")?;
        let negative = if self.peek() == Some(&Token::Minus) {
            self.pos += 1;
            true
        } else {
            false
        };
        let mean = match self.next("a number")? {
            Token::Number(v) => v,
            other => {
                self.pos -= 1;
                return Err(self.error(format!("expected a number, found {}", other.describe())));
            }
        };
        if self.pos != self.tokens.len() {
            return Err(self.error("unexpected trailing input"));
        }
        Ok((matrix, if negative { -mean } else { mean }))
    }
}

/// Parse constraint-file text into observable/mean pairs with source labels.
pub fn parse_items(text: &str) -> Result<Vec<(Observable, f64)>, SyntaxError> {
    let mut items: Vec<(Observable, f64)> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let mut lexer = Lexer::new(line_no, raw);
        let tokens = lexer.tokens()?;
        if tokens.is_empty() {
            continue; // blank or comment
        }
        let mut parser = LineParser {
            line: line_no,
            tokens,
            pos: 0,
            end_col: raw.chars().count() + 1,
        };
        let (matrix, mean) = parser.constraint()?;
        let label = raw.split('=').next().unwrap_or(raw).trim().to_string();
        for (seen, _) in &items {
            if seen.matrix().max_abs_diff(&matrix) < 1e-12 {
                return Err(SyntaxError {
                    line: line_no,
                    col: 1,
                    message: format!("duplicate observable '{label}'"),
                });
            }
        }
        let observable = Observable::new(matrix, label).map_err(|e| SyntaxError {
            line: line_no,
            col: 1,
            message: e.to_string(),
        })?;
        items.push((observable, mean));
    }
    if items.is_empty() {
        return Err(SyntaxError {
            line: 1,
            col: 1,
            message: "no constraints in file".into(),
        });
    }
    Ok(items)
}

/// Parse and validate into a full constraint set.
pub fn parse_constraints(text: &str) -> Result<ConstraintSet, Box<dyn std::error::Error>> {
    let items = parse_items(text)?;
    Ok(ConstraintSet::new(items)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use mininfer::quantum::BellState;

    #[test]
    fn parses_chsh_line() {
        let set = parse_constraints("sqrt2*XX + sqrt2*ZZ = 1.3").unwrap();
        assert_eq!(set.len(), 1);
        let (obs, mean) = &set.items()[0];
        assert_eq!(*mean, 1.3);
        let diag = BellBasis::get().diagonal(obs.matrix());
        let s = 2.0 * 2.0_f64.sqrt();
        assert!((diag[BellState::PhiPlus.index()] - s).abs() < 1e-12);
        assert!((diag[BellState::PsiMinus.index()] + s).abs() < 1e-12);
    }

    #[test]
    fn parses_bell_projector() {
        let set = parse_constraints("P[PSI-] = 0.75").unwrap();
        let (obs, mean) = &set.items()[0];
        assert_eq!(*mean, 0.75);
        let want = BellBasis::get().projector(BellState::PsiMinus);
        assert!(obs.matrix().max_abs_diff(want) < 1e-15);
    }

    #[test]
    fn parses_marginal_and_comments() {
        let text = "# marginal data\n\nXI = 0\n";
        let set = parse_constraints(text).unwrap();
        assert_eq!(set.len(), 1);
        assert_eq!(set.items()[0].1, 0.0);
        assert_eq!(set.items()[0].0.label(), "XI");
    }

    #[test]
    fn parses_quotient_coefficient_and_negative_mean() {
        let set = parse_constraints("1/sqrt2*XX - 1/sqrt2*ZZ = -0.25").unwrap();
        assert_eq!(set.items()[0].1, -0.25);
    }

    #[test]
    fn parses_multi_line_local_set() {
        let text = "sqrt2*XX = 0.65\nsqrt2*ZZ = 0.65\nXI = 0\nZI = 0\nIX = 0\nIZ = 0\n";
        let set = parse_constraints(text).unwrap();
        assert_eq!(set.len(), 6);
    }

    #[test]
    fn error_positions_are_reported() {
        let err = parse_items("sqrt2*XX + = 1.0").unwrap_err();
        assert_eq!(err.line, 1);
        assert_eq!(err.col, 12);

        let err = parse_items("XX = 0.5\nQQ = 1").unwrap_err();
        assert_eq!(err.line, 2);
        assert_eq!(err.col, 1);

        let err = parse_items("XX = ").unwrap_err();
        assert_eq!(err.line, 1);

        let err = parse_items("P[TAU-] = 0.5").unwrap_err();
        assert_eq!(err.line, 1);
        assert_eq!(err.col, 3);
    }

    #[test]
    fn rejects_duplicates_and_dependents() {
        assert!(parse_items("XX = 0.1\nXX = 0.2").is_err());
        // Scaled duplicate passes parsing, fails the constraint-set rank check.
        assert!(parse_constraints("XX = 0.1\n2*XX = 0.2").is_err());
        // Identity observable is information-free.
        assert!(parse_constraints("II = 1").is_err());
    }

    #[test]
    fn rejects_bad_quotient() {
        assert!(parse_items("2/sqrt2*XX = 0.1").is_err());
        assert!(parse_items("1/2*XX = 0.1").is_err());
    }
}
