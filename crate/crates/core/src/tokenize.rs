// Copyright 2026 The faqfuse Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//! Text normalization and tokenization.
//!
//! Both modes apply NFC normalization and lowercase letters. `Char` mode is
//! meant for CJK-dominant text: every CJK character is its own token while
//! contiguous runs of other letters and digits are kept together.
//! `UnicodeWord` mode follows Unicode word boundaries (UAX #29).

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use unicode_normalization::UnicodeNormalization;
use unicode_segmentation::UnicodeSegmentation;

use crate::error::Error;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TokenizerMode {
    #[default]
    Char,
    UnicodeWord,
}

impl fmt::Display for TokenizerMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TokenizerMode::Char => "char",
            TokenizerMode::UnicodeWord => "unicode-word",
        })
    }
}

impl FromStr for TokenizerMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "char" => Ok(TokenizerMode::Char),
            "unicode-word" | "word" => Ok(TokenizerMode::UnicodeWord),
            other => Err(Error::invalid(format!("unknown tokenizer mode {other:?}"))),
        }
    }
}

/// NFC-normalizes `text`.
pub fn normalize(text: &str) -> String {
    text.nfc().collect()
}

pub fn tokenize(text: &str, mode: TokenizerMode) -> Vec<String> {
    let text = normalize(text);
    match mode {
        TokenizerMode::Char => char_tokens(&text),
        TokenizerMode::UnicodeWord => text.unicode_words().map(str::to_lowercase).collect(),
    }
}

fn char_tokens(text: &str) -> Vec<String> {
    let mut tokens = Vec::new();
    let mut run = String::new();
    for c in text.chars() {
        if is_cjk(c) {
            flush(&mut run, &mut tokens);
            tokens.push(c.to_string());
        } else if c.is_alphanumeric() {
            run.extend(c.to_lowercase());
        } else {
            flush(&mut run, &mut tokens);
        }
    }
    flush(&mut run, &mut tokens);
    tokens
}

fn flush(run: &mut String, tokens: &mut Vec<String>) {
    if !run.is_empty() {
        tokens.push(std::mem::take(run));
    }
}

/// Han ideographs, kana, bopomofo and hangul.
pub fn is_cjk(c: char) -> bool {
    matches!(c as u32,
        0x1100..=0x11FF
        | 0x3040..=0x30FF
        | 0x3100..=0x312F
        | 0x3130..=0x318F
        | 0x31A0..=0x31BF
        | 0x31F0..=0x31FF
        | 0x3400..=0x4DBF
        | 0x4E00..=0x9FFF
        | 0xAC00..=0xD7AF
        | 0xF900..=0xFAFF
        | 0x20000..=0x2A6DF
        | 0x2A700..=0x2EBEF
        | 0x2F800..=0x2FA1F
        | 0x30000..=0x3134F)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(text: &str, mode: TokenizerMode) -> Vec<String> {
        tokenize(text, mode)
    }

    #[test]
    fn empty_text_has_no_tokens() {
        assert!(toks("", TokenizerMode::Char).is_empty());
        assert!(toks("", TokenizerMode::UnicodeWord).is_empty());
        assert!(toks("  \t ", TokenizerMode::Char).is_empty());
    }

    #[test]
    fn word_mode_splits_and_lowercases() {
        assert_eq!(toks("BM25 rocks", TokenizerMode::UnicodeWord), ["bm25", "rocks"]);
        assert_eq!(
            toks("Where's the MRT, please?", TokenizerMode::UnicodeWord),
            ["where's", "the", "mrt", "please"]
        );
    }

    // Hand-segmented expectations for mixed-script input in char mode.
    #[test]
    fn char_mode_matches_hand_segmentation() {
        let cases: [(&str, &[&str]); 10] = [
            ("台北市MRT", &["台", "北", "市", "mrt"]),
            ("我想借書", &["我", "想", "借", "書"]),
            ("BM25排序", &["bm25", "排", "序"]),
            ("如何申請 iPhone 15？", &["如", "何", "申", "請", "iphone", "15"]),
            ("圖書館open到幾點", &["圖", "書", "館", "open", "到", "幾", "點"]),
            ("COVID-19疫苗", &["covid", "19", "疫", "苗"]),
            ("abc", &["abc"]),
            ("，。！", &[]),
            ("台灣 Taiwan 2024年", &["台", "灣", "taiwan", "2024", "年"]),
            ("ひらがなとカタカナ", &["ひ", "ら", "が", "な", "と", "カ", "タ", "カ", "ナ"]),
        ];
        for (text, expected) in cases {
            assert_eq!(toks(text, TokenizerMode::Char), expected, "input {text:?}");
        }
    }

    #[test]
    fn normalization_is_nfc() {
        // "e" + combining acute == precomposed "é"
        let decomposed = "cafe\u{301}";
        assert_eq!(toks(decomposed, TokenizerMode::UnicodeWord), ["café"]);
        assert_eq!(toks(decomposed, TokenizerMode::Char), toks("café", TokenizerMode::Char));
    }

    #[test]
    fn mode_parses_from_str() {
        assert_eq!("char".parse::<TokenizerMode>().unwrap(), TokenizerMode::Char);
        assert_eq!(
            "unicode-word".parse::<TokenizerMode>().unwrap(),
            TokenizerMode::UnicodeWord
        );
        assert!("nope".parse::<TokenizerMode>().is_err());
    }

    proptest::proptest! {
        #[test]
        fn word_mode_idempotent_on_ascii(text in "[ -~]{0,60}") {
            let once = toks(&text, TokenizerMode::UnicodeWord);
            let twice = toks(&once.join(" "), TokenizerMode::UnicodeWord);
            proptest::prop_assert_eq!(once, twice);
        }
    }
}
