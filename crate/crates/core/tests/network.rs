mod common;

use std::io::{BufRead, BufReader, Write};
use std::net::{TcpListener, TcpStream};
use std::sync::Arc;

use docspan_core::schedule::{run_document, WindowLimits};
use docspan_core::translate::{
    serve_mock, ClientOptions, FaultKind, FaultTrigger, MockSpec, MockTranslator, Session,
    TcpTranslator, Transform, TranslateError, TranslationRequest, Translator,
};
use docspan_core::SeparatorToken;

use common::Gen;

fn requests(texts: &[String]) -> Vec<TranslationRequest> {
    texts
        .iter()
        .zip(1u64..)
        .map(|(t, id)| TranslationRequest {
            id,
            text: t.clone(),
        })
        .collect()
}

#[test]
fn served_mock_matches_in_process_mock() {
    let spec: MockSpec = "word-reverse?fault=word-loop&every=7&seed=3"
        .parse()
        .unwrap();
    let server = serve_mock("127.0.0.1:0", spec.clone()).unwrap();
    let mut gen = Gen::new(51);
    let texts: Vec<String> = (0..1000).map(|_| gen.sentence(12)).collect();
    let reqs = requests(&texts);
    let options = ClientOptions {
        workers: 4,
        ..ClientOptions::default()
    };
    let remote = TcpTranslator::new(server.local_addr().to_string(), options)
        .translate_batch(&reqs)
        .unwrap();
    let local = MockTranslator::new(spec).translate_batch(&reqs).unwrap();
    let mut remote_sorted = remote.clone();
    remote_sorted.sort_by_key(|r| r.id);
    assert_eq!(remote_sorted, local);
    server.shutdown();
}

#[test]
fn network_scheduling_equals_in_process_scheduling() {
    let spec = MockSpec::new(Transform::Uppercase).with_fault(
        FaultKind::DropSeparator,
        FaultTrigger::Every(5),
        0,
    );
    let server = serve_mock("127.0.0.1:0", spec.clone()).unwrap();
    let sep = SeparatorToken::default();
    let remote = Session::new(Arc::new(TcpTranslator::new(
        server.local_addr().to_string(),
        ClientOptions::default(),
    )));
    let local = Session::new(Arc::new(MockTranslator::new(spec)));
    let mut gen = Gen::new(52);
    for d in 0..20 {
        let doc = gen.document(&format!("d{d}"), 5, 40);
        let a = run_document(&doc, &WindowLimits::default(), &remote, &sep).unwrap();
        let b = run_document(&doc, &WindowLimits::default(), &local, &sep).unwrap();
        assert_eq!(a, b);
    }
}

#[test]
fn malformed_frame_gets_error_and_connection_survives() {
    let server = serve_mock("127.0.0.1:0", MockSpec::new(Transform::Uppercase)).unwrap();
    let stream = TcpStream::connect(server.local_addr()).unwrap();
    let mut reader = BufReader::new(stream.try_clone().unwrap());
    let mut writer = stream;
    writer.write_all(b"not a frame\n7\thello\n").unwrap();
    writer.write_all(b"\xff\xfe\n8\tworld\n").unwrap();
    writer.flush().unwrap();
    let mut lines = Vec::new();
    for _ in 0..4 {
        let mut line = String::new();
        reader.read_line(&mut line).unwrap();
        lines.push(line);
    }
    assert!(lines[0].starts_with("ERR\t\t"), "{:?}", lines[0]);
    assert_eq!(lines[1], "7\tHELLO\n");
    assert!(lines[2].starts_with("ERR\t\t"), "{:?}", lines[2]);
    assert_eq!(lines[3], "8\tWORLD\n");
}

#[test]
fn closed_port_reports_unavailable() {
    let addr = {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        listener.local_addr().unwrap()
    };
    let options = ClientOptions {
        retries: 1,
        ..ClientOptions::default()
    };
    let session = Session::new(Arc::new(TcpTranslator::new(addr.to_string(), options)));
    match session.translate(&["hello".to_string()]) {
        Err(TranslateError::TranslatorUnavailable(_)) => {}
        other => panic!("expected TranslatorUnavailable, got {other:?}"),
    }
}
