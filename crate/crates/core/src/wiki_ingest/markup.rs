//! Best-effort wikitext/HTML stripping to plain text. Idempotent: stripping
//! already-stripped text is a no-op. Unparseable fragments pass through.

/// Strip templates, tables, link syntax, HTML tags, comments, and quote
/// markup from wikitext.
pub fn strip_markup(raw: &str) -> String {
    let mut text = remove_comments(raw);
    text = remove_delimited(&text, "{{", "}}");
    text = remove_delimited(&text, "{|", "|}");
    text = remove_refs(&text);
    text = resolve_links(&text);
    text = resolve_external_links(&text);
    text = remove_tags(&text);
    text = remove_quote_markup(&text);
    text = strip_line_decorations(&text);
    text = decode_entities(&text);
    text.trim().to_string()
}

fn remove_comments(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut rest = text;
    while let Some(start) = rest.find("<!--") {
        out.push_str(&rest[..start]);
        match rest[start..].find("-->") {
            Some(end) => rest = &rest[start + end + 3..],
            None => return out, // unterminated comment: drop the tail
        }
    }
    out.push_str(rest);
    out
}

/// Remove `open`...`close` spans with nesting. Unmatched openers pass
/// through untouched.
fn remove_delimited(text: &str, open: &str, close: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut i = 0;
    let bytes = text.as_bytes();
    while i < bytes.len() {
        if text[i..].starts_with(open) {
            let mut depth = 1;
            let mut j = i + open.len();
            while j < bytes.len() && depth > 0 {
                if text[j..].starts_with(open) {
                    depth += 1;
                    j += open.len();
                } else if text[j..].starts_with(close) {
                    depth -= 1;
                    j += close.len();
                } else {
                    j += utf8_len(bytes[j]);
                }
            }
            if depth == 0 {
                i = j;
                continue;
            }
            // No matching closer: emit as-is.
        }
        let n = utf8_len(bytes[i]);
        out.push_str(&text[i..i + n]);
        i += n;
    }
    out
}

fn utf8_len(first_byte: u8) -> usize {
    match first_byte {
        b if b < 0x80 => 1,
        b if b >= 0xF0 => 4,
        b if b >= 0xE0 => 3,
        _ => 2,
    }
}

/// `<ref ...>...</ref>` footnotes disappear entirely, including content.
fn remove_refs(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut rest = text;
    loop {
        let Some(start) = rest.find("<ref") else {
            out.push_str(rest);
            return out;
        };
        out.push_str(&rest[..start]);
        let after = &rest[start..];
        // Self-closing <ref ... /> or paired <ref ...>...</ref>.
        let self_close = after.find("/>");
        let open_end = after.find('>');
        match (self_close, open_end) {
            (Some(sc), Some(oe)) if sc + 1 == oe => rest = &after[oe + 1..],
            (_, Some(_)) => match after.find("</ref>") {
                Some(end) => rest = &after[end + 6..],
                None => {
                    out.push_str(after);
                    return out;
                }
            },
            _ => {
                out.push_str(after);
                return out;
            }
        }
    }
}

/// `[[target|label]]` -> label, `[[target]]` -> target; namespaced links
/// (File:, Category:, ...) disappear entirely.
fn resolve_links(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut rest = text;
    while let Some(start) = rest.find("[[") {
        out.push_str(&rest[..start]);
        let after = &rest[start + 2..];
        // Find the matching close, honoring one level of nesting (file
        // captions may embed links).
        let mut depth = 1;
        let mut end = None;
        let mut k = 0;
        let bytes = after.as_bytes();
        while k < bytes.len() {
            if after[k..].starts_with("[[") {
                depth += 1;
                k += 2;
            } else if after[k..].starts_with("]]") {
                depth -= 1;
                if depth == 0 {
                    end = Some(k);
                    break;
                }
                k += 2;
            } else {
                k += utf8_len(bytes[k]);
            }
        }
        let Some(end) = end else {
            out.push_str(&rest[start..]);
            return out;
        };
        let inner = &after[..end];
        let target = inner.split('|').next().unwrap_or("");
        if !target.contains(':') {
            let resolved = inner.rsplit('|').next().unwrap_or("");
            out.push_str(&resolve_links(resolved));
        }
        rest = &after[end + 2..];
    }
    out.push_str(rest);
    out
}

/// `[http://url label]` -> label, `[http://url]` -> removed.
fn resolve_external_links(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut rest = text;
    while let Some(start) = rest.find('[') {
        let after = &rest[start + 1..];
        let is_url = after.starts_with("http://") || after.starts_with("https://");
        if !is_url {
            out.push_str(&rest[..start + 1]);
            rest = after;
            continue;
        }
        out.push_str(&rest[..start]);
        let Some(end) = after.find(']') else {
            out.push_str(&rest[start..]);
            return out;
        };
        let inner = &after[..end];
        if let Some((_, label)) = inner.split_once(' ') {
            out.push_str(label);
        }
        rest = &after[end + 1..];
    }
    out.push_str(rest);
    out
}

/// Remove `<tag ...>` and `</tag>`; bare `<` stays.
fn remove_tags(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut rest = text;
    while let Some(start) = rest.find('<') {
        let after = &rest[start + 1..];
        let body = after.strip_prefix('/').unwrap_or(after);
        let tag_like = body.chars().next().is_some_and(|c| c.is_ascii_alphabetic());
        if tag_like {
            if let Some(end) = after.find('>') {
                out.push_str(&rest[..start]);
                rest = &after[end + 1..];
                continue;
            }
        }
        out.push_str(&rest[..start + 1]);
        rest = after;
    }
    out.push_str(rest);
    out
}

fn remove_quote_markup(text: &str) -> String {
    // Longest first so ''''' does not leave residue.
    text.replace("'''''", "").replace("'''", "").replace("''", "")
}

/// Drop heading `=` fences and list markers at line starts.
fn strip_line_decorations(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for (i, line) in text.lines().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        let trimmed = line.trim_start();
        let stripped = if trimmed.starts_with('=') && trimmed.ends_with('=') && trimmed.len() > 1 {
            trimmed.trim_matches('=').trim()
        } else {
            trimmed.trim_start_matches(['*', '#', ':', ';']).trim_start()
        };
        out.push_str(stripped);
    }
    out
}

fn decode_entities(text: &str) -> String {
    // Decode to a fixpoint so double-encoded entities (&amp;nbsp;) do not
    // break idempotence of the whole strip pass.
    let mut current = text.to_string();
    for _ in 0..4 {
        let next = current
            .replace("&nbsp;", " ")
            .replace("&ndash;", "-")
            .replace("&mdash;", "-")
            .replace("&quot;", "\"")
            .replace("&amp;", "&");
        if next == current {
            break;
        }
        current = next;
    }
    current
}
