//! Text format for delivery schemes.
//!
//! One message per line, subfiles joined by `+`, each written `W[i,S,T]`
//! with `i` the file index, `S` the class and `T` the tag. A user set is a
//! string of digits when every member is below 10 (`W[1,1234,23]`), and
//! dot-separated otherwise (`W[1,3.10.11,10.11]`); a one-member set above 9
//! keeps a trailing dot (`12.`) and the empty set is the empty string.
//! Subpacketization is not stored: it comes from the placement.

use std::fmt::Write as _;

use anyhow::{anyhow, bail, ensure, Context, Result};
use selfish_cc_core::delivery::{DeliveryScheme, XorMessage};
use selfish_cc_core::placement::SubfileId;
use selfish_cc_core::{FileRef, UserSet, MAX_USERS};

pub fn format_users(set: UserSet) -> String {
    if set.iter().all(|u| u < 10) {
        return set.iter().map(|u| u.to_string()).collect();
    }
    let mut out = set.iter().map(|u| u.to_string()).collect::<Vec<_>>().join(".");
    if set.len() == 1 {
        out.push('.');
    }
    out
}

pub fn parse_users(text: &str) -> Result<UserSet> {
    let members: Vec<u32> = if text.contains('.') {
        let body = text.strip_suffix('.').filter(|b| !b.contains('.')).unwrap_or(text);
        body.split('.')
            .map(|p| {
                ensure!(!p.is_empty() && !p.starts_with('0'), "bad user {p:?} in {text:?}");
                p.parse::<u32>().with_context(|| format!("bad user {p:?}"))
            })
            .collect::<Result<_>>()?
    } else {
        text.chars()
            .map(|c| c.to_digit(10).filter(|&d| d > 0).ok_or_else(|| anyhow!("bad user {c:?} in {text:?}")))
            .collect::<Result<_>>()?
    };
    ensure!(members.iter().all(|&u| (1..=MAX_USERS).contains(&u)), "user out of range in {text:?}");
    ensure!(members.windows(2).all(|w| w[0] < w[1]), "users not strictly increasing in {text:?}");
    let set = UserSet::from_users(members);
    ensure!(format_users(set) == text, "non-canonical user set {text:?}");
    Ok(set)
}

pub fn format_subfile(id: &SubfileId) -> String {
    format!("W[{},{},{}]", id.file.index, format_users(id.file.class), format_users(id.tag))
}

pub fn parse_subfile(text: &str) -> Result<SubfileId> {
    let body = text
        .strip_prefix("W[")
        .and_then(|t| t.strip_suffix(']'))
        .ok_or_else(|| anyhow!("expected W[i,S,T], got {text:?}"))?;
    let parts: Vec<&str> = body.split(',').collect();
    let [index, class, tag] = parts[..] else { bail!("expected three fields in {text:?}") };
    ensure!(!index.starts_with('0'), "bad file index in {text:?}");
    let index: u32 = index.parse().with_context(|| format!("bad file index in {text:?}"))?;
    Ok(SubfileId::new(FileRef::new(parse_users(class)?, index), parse_users(tag)?))
}

pub fn format_scheme(sc: &DeliveryScheme) -> String {
    let mut out = String::new();
    for m in sc.messages() {
        let line: Vec<String> = m.subfiles().iter().map(format_subfile).collect();
        writeln!(out, "{}", line.join("+")).unwrap();
    }
    out
}

pub fn parse_scheme(text: &str, subpacketization: u128) -> Result<DeliveryScheme> {
    ensure!(text.is_empty() || text.ends_with('\n'), "scheme text must end with a newline");
    let mut messages = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let ids = line
            .split('+')
            .map(parse_subfile)
            .collect::<Result<Vec<_>>>()
            .with_context(|| format!("line {}", n + 1))?;
        messages.push(XorMessage::new(ids).with_context(|| format!("line {}", n + 1))?);
    }
    Ok(DeliveryScheme::new(subpacketization, messages))
}
