//! Drain: online template mining over a fixed-depth prefix tree.
//!
//! The first tree level keys on token count, the next `depth - 2` levels on
//! leading tokens (tokens containing a digit route through the `<*>` child).
//! Each leaf holds a list of templates; a line joins the most similar one if
//! the fraction of positions that match exactly reaches `sim_threshold`,
//! otherwise it starts a new template. Merging a line into a template turns
//! every disagreeing position into `<*>`.

use std::collections::HashMap;
use std::fmt;

use crate::error::{Error, Result};

pub const WILDCARD: &str = "<*>";

/// Id of the reserved template that every empty line maps to.
pub const EMPTY_TEMPLATE_ID: usize = 0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DrainConfig {
    pub depth: usize,
    pub sim_threshold: f64,
    pub max_children: usize,
}

impl Default for DrainConfig {
    fn default() -> Self {
        DrainConfig {
            depth: 4,
            sim_threshold: 0.4,
            max_children: 100,
        }
    }
}

impl DrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.depth < 3 {
            return Err(Error::Config(format!("drain depth {} < 3", self.depth)));
        }
        if !(self.sim_threshold > 0.0 && self.sim_threshold < 1.0) {
            return Err(Error::Config(format!(
                "similarity threshold {} outside (0, 1)",
                self.sim_threshold
            )));
        }
        if self.max_children < 2 {
            return Err(Error::Config("max_children must be at least 2".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LogTemplate {
    pub id: usize,
    pub tokens: Vec<String>,
}

impl LogTemplate {
    pub fn pattern(&self) -> String {
        self.tokens.join(" ")
    }

    pub fn wildcard_count(&self) -> usize {
        self.tokens.iter().filter(|t| *t == WILDCARD).count()
    }

    /// True when `tokens` agrees with every non-wildcard position.
    pub fn matches<S: AsRef<str>>(&self, tokens: &[S]) -> bool {
        self.tokens.len() == tokens.len()
            && self
                .tokens
                .iter()
                .zip(tokens)
                .all(|(t, s)| t == WILDCARD || t == s.as_ref())
    }
}

impl fmt::Display for LogTemplate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.pattern())
    }
}

#[derive(Debug, Default, Clone)]
struct Node {
    children: HashMap<String, Node>,
    templates: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct DrainParser {
    config: DrainConfig,
    root: HashMap<usize, Node>,
    templates: Vec<LogTemplate>,
}

fn has_digit(token: &str) -> bool {
    token.bytes().any(|b| b.is_ascii_digit())
}

impl DrainParser {
    pub fn new(config: DrainConfig) -> Result<Self> {
        config.validate()?;
        Ok(DrainParser {
            config,
            root: HashMap::new(),
            templates: vec![LogTemplate {
                id: EMPTY_TEMPLATE_ID,
                tokens: Vec::new(),
            }],
        })
    }

    /// All templates, indexed by id; entry 0 is the reserved empty template.
    pub fn templates(&self) -> &[LogTemplate] {
        &self.templates
    }

    /// Number of mined templates, not counting the reserved one.
    pub fn template_count(&self) -> usize {
        self.templates.len() - 1
    }

    fn prefix_len(&self, n_tokens: usize) -> usize {
        (self.config.depth - 2).min(n_tokens)
    }

    /// Assigns `content` to a template and returns its id.
    pub fn add(&mut self, content: &str) -> usize {
        let tokens: Vec<&str> = content.split_whitespace().collect();
        if tokens.is_empty() {
            return EMPTY_TEMPLATE_ID;
        }
        let depth = self.prefix_len(tokens.len());
        let max_children = self.config.max_children;

        // Walk (and extend) the prefix path for this line.
        let mut node = self.root.entry(tokens.len()).or_default();
        for &tok in &tokens[..depth] {
            let key = if node.children.contains_key(tok) {
                tok
            } else if has_digit(tok) {
                WILDCARD
            } else if node.children.contains_key(WILDCARD) {
                if node.children.len() < max_children {
                    tok
                } else {
                    WILDCARD
                }
            } else if node.children.len() + 1 < max_children {
                tok
            } else {
                WILDCARD
            };
            node = node.children.entry(key.to_string()).or_default();
        }

        let threshold = self.config.sim_threshold;
        let mut best: Option<(usize, f64, usize)> = None;
        for &id in &node.templates {
            let t = &self.templates[id].tokens;
            let mut same = 0usize;
            let mut wild = 0usize;
            for (a, b) in t.iter().zip(&tokens) {
                if a == WILDCARD {
                    wild += 1;
                } else if a == b {
                    same += 1;
                }
            }
            let sim = same as f64 / tokens.len() as f64;
            let better = match best {
                None => true,
                Some((_, s, w)) => sim > s || (sim == s && wild > w),
            };
            if better {
                best = Some((id, sim, wild));
            }
        }

        match best {
            Some((id, sim, _)) if sim >= threshold => {
                for (t, s) in self.templates[id].tokens.iter_mut().zip(&tokens) {
                    if t != s {
                        *t = WILDCARD.to_string();
                    }
                }
                id
            }
            _ => {
                let id = self.templates.len();
                self.templates.push(LogTemplate {
                    id,
                    tokens: tokens.iter().map(|s| s.to_string()).collect(),
                });
                node.templates.push(id);
                id
            }
        }
    }
}

/// Parses every content string in order. Returns the template table (with the
/// reserved empty template at id 0) and one template id per line.
pub fn drain_parse<'a, I>(
    contents: I,
    config: DrainConfig,
) -> Result<(Vec<LogTemplate>, Vec<usize>)>
where
    I: IntoIterator<Item = &'a str>,
{
    let mut parser = DrainParser::new(config)?;
    let ids = contents.into_iter().map(|c| parser.add(c)).collect();
    Ok((parser.templates, ids))
}
