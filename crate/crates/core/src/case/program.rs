//! A small mini-Java program model and its XMI serialization, for building
//! case fixtures without writing XMI by hand.

use std::fmt::Write;

use crate::rules::expr::xml_escape;

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Program {
    pub enums: Vec<EnumDecl>,
    pub classes: Vec<ClassDecl>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EnumDecl {
    pub name: String,
    pub constants: Vec<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ClassDecl {
    pub name: String,
    pub is_abstract: bool,
    /// Index into [`Program::classes`].
    pub extends: Option<usize>,
    pub methods: Vec<MethodDecl>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MethodDecl {
    pub name: String,
    pub body: Vec<Stmt>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Stmt {
    /// `Classes[i].Instance().activate();`
    Activate(usize),
    /// `send(Enums[e].constants[k]);`
    Send {
        enumeration: usize,
        constant: usize,
    },
    /// Any other call with no arguments.
    Call(String),
    Block(Vec<Stmt>),
    /// `(constantName, statements)` per case.
    Switch(Vec<(String, Vec<Stmt>)>),
    /// Body plus `(exceptionType, statements)` per catch.
    Try {
        body: Vec<Stmt>,
        catches: Vec<(String, Vec<Stmt>)>,
    },
}

impl Program {
    pub fn class(&mut self, name: &str, is_abstract: bool, extends: Option<usize>) -> usize {
        self.classes.push(ClassDecl {
            name: name.into(),
            is_abstract,
            extends,
            methods: Vec::new(),
        });
        self.classes.len() - 1
    }

    pub fn method(&mut self, class: usize, name: &str, body: Vec<Stmt>) {
        self.classes[class].methods.push(MethodDecl {
            name: name.into(),
            body,
        });
    }

    pub fn enumeration(&mut self, name: &str, constants: &[&str]) -> usize {
        self.enums.push(EnumDecl {
            name: name.into(),
            constants: constants.iter().map(|c| c.to_string()).collect(),
        });
        self.enums.len() - 1
    }

    /// Serializes as an `xmi:XMI` document with one root per enum and class.
    pub fn to_xmi(&self) -> String {
        let mut w = Writer {
            out: String::new(),
            calls: 0,
        };
        w.out
            .push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
        w.out.push_str(concat!(
            "<xmi:XMI xmi:version=\"2.0\" xmlns:xmi=\"http://www.omg.org/XMI\" ",
            "xmlns:xsi=\"http://www.w3.org/2001/XMLSchema-instance\" xmlns:java=\"http://minijava/1.0\">\n",
        ));
        for (i, e) in self.enums.iter().enumerate() {
            writeln!(
                w.out,
                "  <java:Enumeration name=\"{}\">",
                xml_escape(&e.name)
            )
            .unwrap();
            for (j, k) in e.constants.iter().enumerate() {
                writeln!(
                    w.out,
                    "    <constants xmi:id=\"e{i}.{j}\" name=\"{}\"/>",
                    xml_escape(k)
                )
                .unwrap();
            }
            w.out.push_str("  </java:Enumeration>\n");
        }
        for (i, c) in self.classes.iter().enumerate() {
            write!(
                w.out,
                "  <java:Class xmi:id=\"c{i}\" name=\"{}\" isAbstract=\"{}\"",
                xml_escape(&c.name),
                c.is_abstract
            )
            .unwrap();
            if let Some(sup) = c.extends {
                write!(w.out, " extends=\"c{sup}\"").unwrap();
            }
            if c.methods.is_empty() {
                w.out.push_str("/>\n");
                continue;
            }
            w.out.push_str(">\n");
            for m in &c.methods {
                writeln!(w.out, "    <methods name=\"{}\">", xml_escape(&m.name)).unwrap();
                w.block("body", None, &m.body, 3);
                w.out.push_str("    </methods>\n");
            }
            w.out.push_str("  </java:Class>\n");
        }
        w.out.push_str("</xmi:XMI>\n");
        w.out
    }
}

struct Writer {
    out: String,
    calls: usize,
}

impl Writer {
    fn pad(&mut self, depth: usize) {
        self.out.push_str(&"  ".repeat(depth));
    }

    /// A `java_Block` under feature `tag`.
    fn block(&mut self, tag: &str, xsi: Option<&str>, stmts: &[Stmt], depth: usize) {
        self.pad(depth);
        write!(self.out, "<{tag}").unwrap();
        if let Some(t) = xsi {
            write!(self.out, " xsi:type=\"{t}\"").unwrap();
        }
        if stmts.is_empty() {
            self.out.push_str("/>\n");
            return;
        }
        self.out.push_str(">\n");
        self.stmts(stmts, depth + 1);
        self.pad(depth);
        writeln!(self.out, "</{tag}>").unwrap();
    }

    fn stmts(&mut self, stmts: &[Stmt], depth: usize) {
        for s in stmts {
            self.stmt(s, depth);
        }
    }

    fn call_stmt(&mut self, depth: usize, open: &str, inner: Option<String>) {
        self.pad(depth);
        self.out
            .push_str("<statements xsi:type=\"java:ExpressionStatement\">\n");
        self.pad(depth + 1);
        match inner {
            None => writeln!(
                self.out,
                "<expression xsi:type=\"java:MethodCall\" {open}/>"
            )
            .unwrap(),
            Some(inner) => {
                writeln!(self.out, "<expression xsi:type=\"java:MethodCall\" {open}>").unwrap();
                self.pad(depth + 2);
                self.out.push_str(&inner);
                self.out.push('\n');
                self.pad(depth + 1);
                self.out.push_str("</expression>\n");
            }
        }
        self.pad(depth);
        self.out.push_str("</statements>\n");
    }

    fn stmt(&mut self, s: &Stmt, depth: usize) {
        match s {
            Stmt::Activate(class) => {
                let id = format!("i{}", self.calls);
                self.calls += 1;
                let inner = format!(
                    "<receiver xsi:type=\"java:MethodCall\" xmi:id=\"{id}\" methodName=\"Instance\" target=\"c{class}\"/>"
                );
                self.call_stmt(
                    depth,
                    &format!("methodName=\"activate\" target=\"{id}\""),
                    Some(inner),
                );
            }
            Stmt::Send {
                enumeration,
                constant,
            } => {
                let inner = format!("<arguments xsi:type=\"java:EnumReference\" constant=\"e{enumeration}.{constant}\"/>");
                self.call_stmt(depth, "methodName=\"send\"", Some(inner));
            }
            Stmt::Call(name) => {
                self.call_stmt(depth, &format!("methodName=\"{}\"", xml_escape(name)), None)
            }
            Stmt::Block(body) => self.block("statements", Some("java:Block"), body, depth),
            Stmt::Switch(cases) => {
                self.pad(depth);
                if cases.is_empty() {
                    self.out
                        .push_str("<statements xsi:type=\"java:Switch\"/>\n");
                    return;
                }
                self.out.push_str("<statements xsi:type=\"java:Switch\">\n");
                for (name, body) in cases {
                    self.pad(depth + 1);
                    write!(self.out, "<cases constantName=\"{}\"", xml_escape(name)).unwrap();
                    self.close_with(body, "cases", depth + 1);
                }
                self.pad(depth);
                self.out.push_str("</statements>\n");
            }
            Stmt::Try { body, catches } => {
                self.pad(depth);
                self.out.push_str("<statements xsi:type=\"java:Try\">\n");
                self.block("body", None, body, depth + 1);
                for (ty, body) in catches {
                    self.pad(depth + 1);
                    write!(self.out, "<catches exceptionType=\"{}\"", xml_escape(ty)).unwrap();
                    if body.is_empty() {
                        self.out.push_str("/>\n");
                        continue;
                    }
                    self.out.push_str(">\n");
                    self.block("body", None, body, depth + 2);
                    self.pad(depth + 1);
                    self.out.push_str("</catches>\n");
                }
                self.pad(depth);
                self.out.push_str("</statements>\n");
            }
        }
    }

    /// Finishes an open start tag whose children are `statements`.
    fn close_with(&mut self, body: &[Stmt], tag: &str, depth: usize) {
        if body.is_empty() {
            self.out.push_str("/>\n");
            return;
        }
        self.out.push_str(">\n");
        self.stmts(body, depth + 1);
        self.pad(depth);
        writeln!(self.out, "</{tag}>").unwrap();
    }
}

/// The TCP connection program behind `fixtures/tcp_small.xmi`.
pub fn tcp_small() -> Program {
    use Stmt::*;
    let mut p = Program::default();
    let flags = p.enumeration("TcpFlags", &["SYN", "ACK", "FIN", "RST", "SYN_ACK"]);
    let [syn, ack, fin, rst, syn_ack] = [0, 1, 2, 3, 4];
    let send = |k: usize| Send {
        enumeration: flags,
        constant: k,
    };
    let case = |k: &str, body: Vec<Stmt>| (k.to_string(), body);

    let state = p.class("State", true, None);
    let closed = p.class("Closed", false, Some(state));
    let listen = p.class("Listen", false, Some(state));
    let syn_sent = p.class("SynSent", false, Some(state));
    let syn_received = p.class("SynReceived", false, Some(state));
    let synchronized = p.class("Synchronized", true, Some(state));
    let established = p.class("Established", false, Some(synchronized));
    let fin_wait1 = p.class("FinWait1", false, Some(synchronized));
    let fin_wait2 = p.class("FinWait2", false, Some(synchronized));
    let close_wait = p.class("CloseWait", false, Some(synchronized));
    let closing = p.class("Closing", false, Some(synchronized));
    let last_ack = p.class("LastAck", false, Some(synchronized));
    let time_wait = p.class("TimeWait", false, Some(synchronized));
    let connection = p.class("TcpConnection", false, None);
    let timer = p.class("Timer", false, None);
    let segment = p.class("Segment", false, None);
    let socket = p.class("TcpSocket", false, Some(connection));
    let logger = p.class("Logger", false, None);
    let buffer = p.class("Buffer", false, None);
    let monitor = p.class("TcpMonitor", true, None);

    p.method(closed, "run", vec![Call("reset".into()), Activate(listen)]);
    p.method(closed, "open", vec![send(syn), Activate(syn_sent)]);
    p.method(
        listen,
        "run",
        vec![Switch(vec![
            case("SYN", vec![send(syn_ack), Activate(syn_received)]),
            case("RST", vec![Activate(closed)]),
        ])],
    );
    p.method(listen, "close", vec![Activate(closed)]);
    p.method(
        syn_sent,
        "run",
        vec![Switch(vec![
            case("SYN_ACK", vec![send(ack), Activate(established)]),
            case("SYN", vec![send(ack), Activate(syn_received)]),
        ])],
    );
    p.method(syn_sent, "close", vec![Activate(closed)]);
    p.method(
        syn_received,
        "run",
        vec![
            Switch(vec![
                case("ACK", vec![Activate(established)]),
                case("RST", vec![send(rst), Activate(listen)]),
            ]),
            Try {
                body: vec![Call("awaitAck".into())],
                catches: vec![("TimeoutException".into(), vec![Activate(closed)])],
            },
        ],
    );
    p.method(
        established,
        "run",
        vec![Switch(vec![
            case("FIN", vec![send(ack), Activate(close_wait)]),
            case("PSH", vec![Call("deliver".into()), Activate(established)]),
        ])],
    );
    p.method(established, "close", vec![send(fin), Activate(fin_wait1)]);
    p.method(
        fin_wait1,
        "run",
        vec![Switch(vec![
            case("ACK", vec![Activate(fin_wait2)]),
            case("FIN", vec![send(ack), Activate(closing)]),
        ])],
    );
    p.method(
        fin_wait2,
        "run",
        vec![Switch(vec![case(
            "FIN",
            vec![send(ack), Activate(time_wait)],
        )])],
    );
    p.method(close_wait, "close", vec![send(fin), Activate(last_ack)]);
    p.method(
        closing,
        "run",
        vec![Switch(vec![case("ACK", vec![Activate(time_wait)])])],
    );
    p.method(
        last_ack,
        "run",
        vec![Switch(vec![case("ACK", vec![Activate(closed)])])],
    );
    p.method(
        time_wait,
        "run",
        vec![Try {
            body: vec![Call("sleep".into()), Activate(closed)],
            catches: vec![(
                "InterruptedException".into(),
                vec![Block(vec![Activate(closed)])],
            )],
        }],
    );
    // calls outside the State hierarchy or into abstract classes give no transition
    p.method(connection, "run", vec![Activate(closed)]);
    p.method(socket, "connect", vec![send(syn), Activate(syn_sent)]);
    p.method(
        closed,
        "abort",
        vec![Activate(synchronized), Activate(timer)],
    );
    p.method(timer, "run", vec![Call("tick".into())]);
    p.method(segment, "checksum", vec![Block(vec![Call("fold".into())])]);
    p.method(logger, "log", vec![Call("write".into())]);
    p.method(
        buffer,
        "flush",
        vec![Call("write".into()), Call("clear".into())],
    );
    p.method(monitor, "observe", vec![Activate(listen)]);
    p
}
