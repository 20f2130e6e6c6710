use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use super::{AnomalyPolicy, CitationGraph, Document, IngestReport};
use crate::error::{Error, Result};
use crate::month::{format_month, parse_month};

fn malformed(file: &str, line: u64, message: impl Into<String>) -> Error {
    Error::Malformed {
        file: file.to_string(),
        line,
        message: message.into(),
    }
}

fn csv_error(file: &str, err: csv::Error) -> Error {
    let line = err.position().map_or(0, |p| p.line());
    malformed(file, line, err.to_string())
}

fn check_header(file: &str, found: &csv::StringRecord, required: &[&str], optional: &[&str]) -> Result<()> {
    let names: Vec<&str> = found.iter().collect();
    let ok = names.len() >= required.len()
        && names.len() <= required.len() + optional.len()
        && names[..required.len()] == *required
        && names[required.len()..] == optional[..names.len() - required.len()];
    if ok {
        Ok(())
    } else {
        let mut expected = required.join(",");
        for o in optional {
            expected.push_str(&format!("[,{o}]"));
        }
        Err(malformed(file, 1, format!("expected header `{expected}`, found `{}`", names.join(","))))
    }
}

/// Reads `doc_id,pub_date[,kind]` and `citing_id,cited_id` tables and
/// finalizes the graph under `policy`.
pub fn ingest<D: Read, C: Read>(
    documents: D,
    documents_name: &str,
    citations: C,
    citations_name: &str,
    policy: AnomalyPolicy,
) -> Result<(CitationGraph, IngestReport)> {
    let mut builder = CitationGraph::builder();

    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(documents);
    let header = rdr.headers().map_err(|e| csv_error(documents_name, e))?.clone();
    check_header(documents_name, &header, &["doc_id", "pub_date"], &["kind"])?;
    for record in rdr.records() {
        let record = record.map_err(|e| csv_error(documents_name, e))?;
        let line = record.position().map_or(0, |p| p.line());
        let id = &record[0];
        if id.is_empty() {
            return Err(malformed(documents_name, line, "empty doc_id"));
        }
        let pub_month = parse_month(&record[1]).map_err(|m| malformed(documents_name, line, m))?;
        let kind = record.get(2).filter(|k| !k.is_empty()).map(str::to_string);
        builder.add_document(Document {
            id: id.to_string(),
            pub_month,
            kind,
        })?;
    }

    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(citations);
    let header = rdr.headers().map_err(|e| csv_error(citations_name, e))?.clone();
    check_header(citations_name, &header, &["citing_id", "cited_id"], &[])?;
    for record in rdr.records() {
        let record = record.map_err(|e| csv_error(citations_name, e))?;
        let line = record.position().map_or(0, |p| p.line());
        if record[0].is_empty() || record[1].is_empty() {
            return Err(malformed(citations_name, line, "empty document id"));
        }
        builder.add_citation(&record[0], &record[1]);
    }

    builder.finalize(policy)
}

pub fn ingest_files(
    documents: &Path,
    citations: &Path,
    policy: AnomalyPolicy,
) -> Result<(CitationGraph, IngestReport)> {
    let docs = File::open(documents)?;
    let cits = File::open(citations)?;
    ingest(
        docs,
        &documents.display().to_string(),
        cits,
        &citations.display().to_string(),
        policy,
    )
}

/// Writes the canonical documents/citations pair: documents sorted by
/// `(pub_month, doc_id)`, citations grouped by citing document in that order.
/// The `kind` column is emitted only when some document carries a kind.
pub fn write_canonical<D: Write, C: Write>(graph: &CitationGraph, documents: D, citations: C) -> Result<()> {
    let with_kind = graph.documents().iter().any(|d| d.kind.is_some());
    let mut w = csv::Writer::from_writer(documents);
    if with_kind {
        w.write_record(["doc_id", "pub_date", "kind"])?;
    } else {
        w.write_record(["doc_id", "pub_date"])?;
    }
    for doc in graph.documents() {
        let date = format_month(doc.pub_month);
        if with_kind {
            w.write_record([doc.id.as_str(), date.as_str(), doc.kind.as_deref().unwrap_or("")])?;
        } else {
            w.write_record([doc.id.as_str(), date.as_str()])?;
        }
    }
    w.flush()?;

    let mut w = csv::Writer::from_writer(citations);
    w.write_record(["citing_id", "cited_id"])?;
    for idx in graph.indices() {
        let citing = graph.doc(idx).id.as_str();
        for &cited in graph.references(idx) {
            w.write_record([citing, graph.doc(cited).id.as_str()])?;
        }
    }
    w.flush()?;
    Ok(())
}
