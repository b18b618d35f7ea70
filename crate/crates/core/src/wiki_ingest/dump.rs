//! MediaWiki XML export parsing (page/revision/text elements), optionally
//! bz2-compressed, with seeded reservoir sampling when the dump holds more
//! pages than the budget.

use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use quick_xml::events::Event;
use quick_xml::Reader;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{IngestError, IngestSummary, PageRevisions, Revision};

/// Parse every page of a dump file. Malformed pages are skipped and counted.
pub fn parse_dump_file(
    path: &Path,
    summary: &mut IngestSummary,
) -> Result<Vec<PageRevisions>, IngestError> {
    let file = File::open(path)?;
    if path.extension().is_some_and(|e| e == "bz2") {
        let reader = BufReader::new(bzip2::read::BzDecoder::new(file));
        parse_dump(reader, summary)
    } else {
        parse_dump(BufReader::new(file), summary)
    }
}

/// Reservoir-sample up to `budget` pages from a dump, deterministically
/// under `seed`.
pub fn sample_pages(
    path: &Path,
    budget: usize,
    seed: u64,
    summary: &mut IngestSummary,
) -> Result<Vec<PageRevisions>, IngestError> {
    let pages = parse_dump_file(path, summary)?;
    if pages.len() <= budget {
        return Ok(pages);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut reservoir: Vec<PageRevisions> = Vec::with_capacity(budget);
    for (i, page) in pages.into_iter().enumerate() {
        if i < budget {
            reservoir.push(page);
        } else {
            let j = rng.gen_range(0..=i);
            if j < budget {
                reservoir[j] = page;
            }
        }
    }
    Ok(reservoir)
}

#[derive(Default)]
struct PageBuilder {
    id: Option<u64>,
    title: Option<String>,
    revisions: Vec<Revision>,
    current_rev_id: Option<u64>,
    current_text: Option<String>,
}

impl PageBuilder {
    fn finish_revision(&mut self) -> bool {
        match (self.current_rev_id.take(), self.current_text.take()) {
            (Some(id), text) => {
                self.revisions.push(Revision {
                    id,
                    text: text.unwrap_or_default(),
                });
                true
            }
            _ => false,
        }
    }

    fn finish(self) -> Option<PageRevisions> {
        Some(PageRevisions {
            page_id: self.id?,
            title: self.title?,
            revisions: self.revisions,
        })
    }
}

pub fn parse_dump<R: BufRead>(
    reader: R,
    summary: &mut IngestSummary,
) -> Result<Vec<PageRevisions>, IngestError> {
    let mut xml = Reader::from_reader(reader);
    xml.config_mut().trim_text(false);
    let mut buf = Vec::new();
    let mut pages = Vec::new();

    // Element path tracking: which containers we are inside of.
    let mut in_page = false;
    let mut in_revision = false;
    let mut current: Option<PageBuilder> = None;
    let mut text_target: Option<&'static str> = None;

    loop {
        let event = xml
            .read_event_into(&mut buf)
            .map_err(|e| IngestError::Dump(format!("xml error at byte {}: {e}", xml.buffer_position())))?;
        match event {
            Event::Start(e) => match e.name().as_ref() {
                b"page" => {
                    in_page = true;
                    current = Some(PageBuilder::default());
                }
                b"revision" if in_page => {
                    in_revision = true;
                }
                b"id" if in_page => {
                    text_target = Some(if in_revision { "rev_id" } else { "page_id" });
                }
                b"title" if in_page && !in_revision => text_target = Some("title"),
                b"text" if in_revision => {
                    text_target = Some("text");
                    if let Some(p) = current.as_mut() {
                        p.current_text = Some(String::new());
                    }
                }
                _ => {}
            },
            Event::Text(t) => {
                if let (Some(target), Some(p)) = (text_target, current.as_mut()) {
                    let value = t
                        .unescape()
                        .map_err(|e| IngestError::Dump(format!("bad text node: {e}")))?;
                    match target {
                        "page_id" => {
                            if p.id.is_none() {
                                p.id = value.trim().parse().ok();
                            }
                        }
                        "rev_id" => {
                            if p.current_rev_id.is_none() {
                                p.current_rev_id = value.trim().parse().ok();
                            }
                        }
                        "title" => p.title = Some(value.into_owned()),
                        "text" => {
                            if let Some(text) = p.current_text.as_mut() {
                                text.push_str(&value);
                            }
                        }
                        _ => unreachable!(),
                    }
                }
            }
            Event::End(e) => match e.name().as_ref() {
                b"id" | b"title" | b"text" => text_target = None,
                b"revision" => {
                    in_revision = false;
                    if let Some(p) = current.as_mut() {
                        if !p.finish_revision() {
                            summary.parse_errors += 1;
                        }
                    }
                }
                b"page" => {
                    in_page = false;
                    match current.take().and_then(PageBuilder::finish) {
                        Some(page) => pages.push(page),
                        None => {
                            summary.parse_errors += 1;
                            summary.skipped_pages += 1;
                        }
                    }
                }
                _ => {}
            },
            Event::Eof => break,
            _ => {}
        }
        buf.clear();
    }
    Ok(pages)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn dump_xml() -> String {
        r#"<mediawiki>
  <page>
    <title>Alpha</title>
    <ns>0</ns>
    <id>1</id>
    <revision>
      <id>10</id>
      <text>first text</text>
    </revision>
    <revision>
      <id>11</id>
      <text>second &amp; text</text>
    </revision>
  </page>
  <page>
    <title>Beta</title>
    <ns>0</ns>
    <id>2</id>
    <revision>
      <id>20</id>
      <text>only revision</text>
    </revision>
  </page>
</mediawiki>"#
            .to_string()
    }

    #[test]
    fn parses_pages_and_revisions() {
        let mut summary = IngestSummary::default();
        let pages = parse_dump(dump_xml().as_bytes(), &mut summary).unwrap();
        assert_eq!(pages.len(), 2);
        assert_eq!(pages[0].page_id, 1);
        assert_eq!(pages[0].title, "Alpha");
        assert_eq!(pages[0].revisions.len(), 2);
        assert_eq!(pages[0].revisions[1].text, "second & text");
        assert_eq!(summary.parse_errors, 0);
    }

    #[test]
    fn malformed_page_is_skipped_and_counted() {
        let xml = "<mediawiki><page><ns>0</ns><revision><id>9</id><text>t</text></revision></page>\
                   <page><title>Ok</title><id>3</id><revision><id>30</id><text>x</text></revision></page></mediawiki>";
        let mut summary = IngestSummary::default();
        let pages = parse_dump(xml.as_bytes(), &mut summary).unwrap();
        assert_eq!(pages.len(), 1);
        assert_eq!(pages[0].page_id, 3);
        assert_eq!(summary.skipped_pages, 1);
        assert!(summary.parse_errors >= 1);
    }

    #[test]
    fn bz2_dump_parses() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("dump.xml.bz2");
        let file = File::create(&path).unwrap();
        let mut encoder = bzip2::write::BzEncoder::new(file, bzip2::Compression::default());
        encoder.write_all(dump_xml().as_bytes()).unwrap();
        encoder.finish().unwrap();

        let mut summary = IngestSummary::default();
        let pages = parse_dump_file(&path, &mut summary).unwrap();
        assert_eq!(pages.len(), 2);
    }

    #[test]
    fn reservoir_sampling_is_deterministic() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("dump.xml");
        std::fs::write(&path, dump_xml()).unwrap();
        let mut s1 = IngestSummary::default();
        let mut s2 = IngestSummary::default();
        let a = sample_pages(&path, 1, 7, &mut s1).unwrap();
        let b = sample_pages(&path, 1, 7, &mut s2).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 1);
    }
}
