//! Affordance stripping (t_0) and the shared word tokenizer.
//!
//! Mentions (`@name`) and URLs (`http://`, `https://`, `www.` up to the next
//! whitespace) are deleted outright. Every `#` is deleted but the hashtag word
//! stays. Whitespace runs collapse to one space.

use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, Tweet};

const URL_PREFIXES: [&str; 3] = ["http://", "https://", "www."];

/// Tweet text with affordances removed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CleanTweet {
    pub id: String,
    pub text_t0: String,
    pub source_id: String,
}

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_'
}

fn starts_with_ignore_ascii_case(haystack: &str, prefix: &str) -> bool {
    haystack.len() >= prefix.len() && haystack.as_bytes()[..prefix.len()].eq_ignore_ascii_case(prefix.as_bytes())
}

fn url_at(rest: &str) -> bool {
    URL_PREFIXES.iter().any(|p| starts_with_ignore_ascii_case(rest, p))
}

/// One left-to-right deletion pass. Returns true when something was removed.
fn strip_pass(input: &str, out: &mut String) -> bool {
    out.clear();
    let mut removed = false;
    let mut prev: Option<char> = None;
    let mut iter = input.char_indices().peekable();

    while let Some((i, c)) = iter.next() {
        let at_boundary = prev.is_none_or(|p| !is_word_char(p));

        if at_boundary && url_at(&input[i..]) {
            removed = true;
            while let Some(&(_, n)) = iter.peek() {
                if n.is_whitespace() {
                    break;
                }
                iter.next();
            }
            prev = None;
            continue;
        }

        if c == '@' && at_boundary && iter.peek().is_some_and(|&(_, n)| is_word_char(n)) {
            removed = true;
            while let Some(&(_, n)) = iter.peek() {
                if !is_word_char(n) {
                    break;
                }
                iter.next();
            }
            prev = None;
            continue;
        }

        if c == '#' {
            removed = true;
            continue;
        }

        out.push(c);
        prev = Some(c);
    }
    removed
}

pub(crate) fn collapse_whitespace(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for word in text.split_whitespace() {
        if !out.is_empty() {
            out.push(' ');
        }
        out.push_str(word);
    }
    out
}

/// Strips mentions, URLs and `#` signs from raw tweet text.
///
/// Deleting a character can bring two fragments together into a new
/// affordance (`h#ttp://`, `@#name`), so passes repeat until nothing changes.
pub fn clean_text(text: &str) -> String {
    let mut current = collapse_whitespace(text);
    let mut buf = String::with_capacity(current.len());
    while strip_pass(&current, &mut buf) {
        current = collapse_whitespace(&buf);
    }
    current
}

pub fn clean(tweet: &Tweet) -> CleanTweet {
    CleanTweet {
        id: tweet.id.clone(),
        text_t0: clean_text(&tweet.text),
        source_id: tweet.id.clone(),
    }
}

/// Replaces every text in the corpus with its t_0 form.
pub fn clean_corpus(corpus: &Corpus) -> Corpus {
    corpus.map_text(|t| clean_text(&t.text))
}

/// True if the text still holds a mention, URL or `#`.
pub fn has_affordance(text: &str) -> bool {
    let mut buf = String::new();
    strip_pass(text, &mut buf)
}

fn is_apostrophe(c: char) -> bool {
    c == '\''
}

/// Byte ranges of word tokens: maximal runs of letters and digits, with
/// apostrophes allowed only between two such characters.
pub fn token_spans(text: &str) -> Vec<Range<usize>> {
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let mut spans = Vec::new();
    let mut start: Option<usize> = None;

    for (k, &(i, c)) in chars.iter().enumerate() {
        let in_token = if c.is_alphanumeric() {
            true
        } else if is_apostrophe(c) {
            start.is_some() && chars.get(k + 1).is_some_and(|&(_, n)| n.is_alphanumeric())
        } else {
            false
        };
        match (in_token, start) {
            (true, None) => start = Some(i),
            (false, Some(s)) => {
                spans.push(s..i);
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        spans.push(s..text.len());
    }
    spans
}

/// Lowercased word tokens in order.
pub fn tokenize(text: &str) -> Vec<String> {
    token_spans(text).into_iter().map(|r| text[r].to_lowercase()).collect()
}
