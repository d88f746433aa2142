//! Command-line front end. Exit codes: 0 success, 1 a check failed
//! (invalid story, replay divergence, rejected script event), 2 usage or
//! I/O error.

use std::ffi::OsString;
use std::io::{BufRead, Write};
use std::net::TcpListener;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Parser, Subcommand, ValueEnum};

use crate::expression::DisplayMode;
use crate::session::{
    decode, encode, export_csv, export_jsonl, export_rows, replay, Autoplay, ClientMessage,
    ConfigError, OptionView, Phase, ServerMessage, Session, SessionConfig, SessionTrace,
    TracedSession, CONFIG_ENV,
};
use crate::story::{
    analyze_coverage, builtin, builtin_source, load_story_file, StoryError, StoryGraph,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "emoact",
    version,
    about = "ACT emotion engine and story session runner"
)]
pub struct Cli {
    /// Engine configuration (TOML).
    #[arg(long, global = true, env = CONFIG_ENV)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Policy {
    Low,
    High,
}

impl From<Policy> for DisplayMode {
    fn from(p: Policy) -> Self {
        match p {
            Policy::Low => DisplayMode::LowFrequency,
            Policy::High => DisplayMode::HighFrequency,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ExportFormat {
    Csv,
    Jsonl,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a session from a script, interactively, or by autoplay.
    Run {
        /// Built-in story id or path to a story file.
        #[arg(long)]
        story: Option<String>,
        /// Client messages, one JSON record per line.
        #[arg(long, conflicts_with = "interactive")]
        script: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_enum)]
        policy: Option<Policy>,
        /// Where to write the trace.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        interactive: bool,
        /// Option ids for autoplay; the first option is taken afterwards.
        #[arg(long, value_delimiter = ',')]
        choose: Vec<String>,
        /// Print raw server messages instead of the label timeline.
        #[arg(long)]
        json: bool,
    },
    /// Re-execute a trace and report the first divergence.
    Replay { trace: PathBuf },
    /// Validate a story and check its emotional coverage.
    Validate { story: String },
    /// Export a trace as per-event rows.
    Export {
        trace: PathBuf,
        #[arg(long, value_enum, default_value = "csv")]
        format: ExportFormat,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Serve the line protocol over TCP and/or WebSocket.
    Serve {
        #[arg(long, default_value = "127.0.0.1:7878")]
        tcp: Option<String>,
        #[arg(long)]
        ws: Option<String>,
        /// Write one trace per session into this directory.
        #[arg(long)]
        trace_dir: Option<PathBuf>,
        /// Extra story files to offer.
        #[arg(long = "story")]
        stories: Vec<PathBuf>,
    },
}

/// Parse arguments and run. Returns the process exit code.
pub fn main_with<I, T>(
    args: I,
    stdin: &mut dyn BufRead,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(stderr, "{}", e.render());
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match execute(cli, stdin, stdout) {
        Ok(code) => code,
        Err(Failure { code, message }) => {
            let _ = writeln!(stderr, "error: {message}");
            code
        }
    }
}

#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

fn usage(message: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_USAGE,
        message: message.into(),
    }
}

fn check(message: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_CHECK_FAILED,
        message: message.into(),
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        usage(e.to_string())
    }
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        usage(e.to_string())
    }
}

impl From<StoryError> for Failure {
    fn from(e: StoryError) -> Self {
        match e {
            StoryError::NotFound(_) | StoryError::Io { .. } => usage(e.to_string()),
            _ => check(e.to_string()),
        }
    }
}

fn execute(cli: Cli, stdin: &mut dyn BufRead, stdout: &mut dyn Write) -> Result<i32, Failure> {
    let config = match &cli.config {
        Some(path) => SessionConfig::load(path)?,
        None => SessionConfig::default(),
    };
    match cli.command {
        Command::Run {
            story,
            script,
            seed,
            policy,
            out,
            interactive,
            choose,
            json,
        } => {
            let opts = RunOptions {
                story,
                seed,
                policy: policy.map(Into::into),
                out,
                json,
            };
            if let Some(path) = script {
                cmd_run_script(config, opts, &path, stdout)
            } else if interactive {
                cmd_run_interactive(config, opts, stdin, stdout)
            } else {
                cmd_run_auto(config, opts, &choose, stdout)
            }
        }
        Command::Replay { trace } => cmd_replay(&trace, stdout),
        Command::Validate { story } => cmd_validate(&config, &story, stdout),
        Command::Export { trace, format, out } => {
            cmd_export(&trace, format, out.as_deref(), stdout)
        }
        Command::Serve {
            tcp,
            ws,
            trace_dir,
            stories,
        } => cmd_serve(config, tcp, ws, trace_dir, &stories, stdout),
    }
}

/// Resolve a story argument: a built-in id first, then a file path.
pub fn resolve_story(name: &str) -> Result<StoryGraph, StoryError> {
    if builtin_source(name).is_some() {
        return builtin(name);
    }
    if Path::new(name).is_file() {
        return load_story_file(name);
    }
    Err(StoryError::NotFound(name.to_string()))
}

struct RunOptions {
    story: Option<String>,
    seed: Option<u64>,
    policy: Option<DisplayMode>,
    out: Option<PathBuf>,
    json: bool,
}

impl RunOptions {
    fn session(
        &self,
        mut config: SessionConfig,
        script_start: Option<&ClientMessage>,
    ) -> Result<Session, Failure> {
        let (mut story, mut seed, mut policy) = (None, None, None);
        if let Some(ClientMessage::StartSession {
            story: s,
            seed: sd,
            policy: p,
            ..
        }) = script_start
        {
            (story, seed, policy) = (s.clone(), *sd, *p);
        }
        let story = self
            .story
            .clone()
            .or(story)
            .unwrap_or_else(|| config.story.clone());
        if let Some(seed) = self.seed.or(seed) {
            config.seed = seed;
        }
        if let Some(mode) = self.policy.or(policy) {
            config.policy.mode = mode;
        }
        let graph = resolve_story(&story)?;
        Session::new(config, Arc::new(graph)).map_err(|e| usage(e.to_string()))
    }

    /// Print the run and write the trace.
    fn finish(&self, traced: &TracedSession, stdout: &mut dyn Write) -> Result<(), Failure> {
        if self.json {
            for r in &traced.trace().records {
                emit(stdout, &r.outputs)?;
            }
        } else {
            print_timeline(stdout, traced.trace())?;
        }
        if let Some(path) = &self.out {
            traced
                .trace()
                .save(path)
                .map_err(|e| usage(format!("cannot write trace {}: {e}", path.display())))?;
        }
        Ok(())
    }
}

fn read_script(path: &Path) -> Result<Vec<ClientMessage>, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| usage(format!("cannot read script {}: {e}", path.display())))?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'))
        .map(|(i, l)| decode(l).map_err(|e| usage(format!("{}:{}: {e}", path.display(), i + 1))))
        .collect()
}

fn emit(stdout: &mut dyn Write, out: &[ServerMessage]) -> std::io::Result<()> {
    for m in out {
        writeln!(stdout, "{}", encode(m))?;
    }
    Ok(())
}

/// One line per accepted event: seq, logical time, event, label, similarity, cue.
pub fn print_timeline(stdout: &mut dyn Write, trace: &SessionTrace) -> std::io::Result<()> {
    writeln!(
        stdout,
        "{:>4} {:>8}  {:<28} {:<10} {:>6}  cue",
        "seq", "t_ms", "event", "label", "sim"
    )?;
    for row in export_rows(trace) {
        let sim = row
            .similarity
            .map(|s| format!("{s:.3}"))
            .unwrap_or_else(|| "-".into());
        let cue = match (row.cue_color.as_str(), row.animations.as_str()) {
            ("", _) => String::new(),
            (c, "") => c.to_string(),
            (c, a) => format!("{c} {a}"),
        };
        writeln!(
            stdout,
            "{:>4} {:>8}  {:<28} {:<10} {:>6}  {cue}",
            row.seq,
            row.t,
            row.event,
            row.label.as_str(),
            sim
        )?;
    }
    Ok(())
}

fn cmd_run_script(
    config: SessionConfig,
    opts: RunOptions,
    path: &Path,
    stdout: &mut dyn Write,
) -> Result<i32, Failure> {
    let script = read_script(path)?;
    let mut traced = TracedSession::new(opts.session(config, script.first())?);
    let result = traced.run(&script);
    opts.finish(&traced, stdout)?;
    match result {
        Ok(()) => Ok(EXIT_OK),
        Err((seq, e)) => Err(check(format!(
            "script event {seq} rejected ({}): {e}",
            e.code()
        ))),
    }
}

fn cmd_run_auto(
    config: SessionConfig,
    opts: RunOptions,
    choose: &[String],
    stdout: &mut dyn Write,
) -> Result<i32, Failure> {
    let mut traced = TracedSession::new(opts.session(config, None)?);
    let choices: Vec<&str> = choose.iter().map(String::as_str).collect();
    let result = Autoplay::default().play_path(&mut traced, &choices);
    opts.finish(&traced, stdout)?;
    match result {
        Ok(_) => Ok(EXIT_OK),
        Err((seq, e)) => Err(check(format!("event {seq} rejected ({}): {e}", e.code()))),
    }
}

const INTERACTIVE_HELP: &str =
    "commands: <number|option id> choose, `gaze on|off`, `valence <x>`, `distance <m>`, `quit`";

fn cmd_run_interactive(
    config: SessionConfig,
    opts: RunOptions,
    stdin: &mut dyn BufRead,
    stdout: &mut dyn Write,
) -> Result<i32, Failure> {
    let mut traced = TracedSession::new(opts.session(config, None)?);
    let pace = Autoplay::default();
    let story_id = traced.session().story().id.clone();
    writeln!(
        stdout,
        "{}\n{INTERACTIVE_HELP}",
        traced.session().story().title
    )?;
    let mut t = 0;
    show(
        stdout,
        &step(&mut traced, ClientMessage::start(0, t, Some(&story_id)))?,
    )?;
    let mut lines = stdin.lines();
    loop {
        let session = traced.session();
        let seq = session.next_seq();
        match session.phase() {
            Phase::Finished => break,
            Phase::Narrating => {
                t += pace.sentence_ms;
                show(stdout, &step(&mut traced, ClientMessage::Tick { seq, t })?)?;
                continue;
            }
            Phase::NotStarted | Phase::AwaitingChoice => {}
        }
        write!(stdout, "> ")?;
        stdout.flush()?;
        let Some(line) = lines.next() else { break };
        let line = line?;
        let options = current_options(traced.session());
        t += pace.think_ms;
        let msg = match parse_interactive(line.trim(), seq, t, &options) {
            Some(Ok(msg)) => msg,
            Some(Err(())) => break,
            None => {
                writeln!(stdout, "{INTERACTIVE_HELP}")?;
                continue;
            }
        };
        match traced.handle(&msg) {
            Ok(out) => show(stdout, &out)?,
            Err(e) => writeln!(stdout, "rejected: {e}")?,
        }
    }
    writeln!(stdout)?;
    opts.finish(&traced, stdout)?;
    Ok(EXIT_OK)
}

fn step(traced: &mut TracedSession, msg: ClientMessage) -> Result<Vec<ServerMessage>, Failure> {
    traced.handle(&msg).map_err(|e| check(e.to_string()))
}

fn current_options(session: &Session) -> Vec<OptionView> {
    session
        .story()
        .node(session.cursor())
        .and_then(|n| n.options())
        .map(|o| {
            o.iter()
                .map(|o| OptionView {
                    id: o.id.clone(),
                    text: o.text.clone(),
                })
                .collect()
        })
        .unwrap_or_default()
}

/// `None` for unrecognised input, `Some(Err(()))` for quit.
fn parse_interactive(
    line: &str,
    seq: u64,
    t: u64,
    options: &[OptionView],
) -> Option<Result<ClientMessage, ()>> {
    use crate::impression::PerceptionKind;
    let mut words = line.split_whitespace();
    let head = words.next()?;
    let arg = words.next();
    let perception = |perception| Some(Ok(ClientMessage::Perception { seq, t, perception }));
    match (head, arg) {
        ("quit" | "q", _) => Some(Err(())),
        ("gaze", Some("on")) => perception(PerceptionKind::Gaze { on_agent: true }),
        ("gaze", Some("off")) => perception(PerceptionKind::Gaze { on_agent: false }),
        ("valence", Some(x)) => perception(PerceptionKind::UserEmotion {
            valence: x.parse().ok()?,
        }),
        ("distance", Some(x)) => perception(PerceptionKind::Proximity {
            distance_m: x.parse().ok()?,
        }),
        (choice, None) => {
            let option = match choice.parse::<usize>() {
                Ok(n) => options.get(n.checked_sub(1)?)?.id.clone(),
                Err(_) => choice.to_string(),
            };
            Some(Ok(ClientMessage::Choice { seq, t, option }))
        }
        _ => None,
    }
}

fn show(stdout: &mut dyn Write, out: &[ServerMessage]) -> std::io::Result<()> {
    for m in out {
        match m {
            ServerMessage::Narration { text, .. } => writeln!(stdout, "  {text}")?,
            ServerMessage::DecisionRequest {
                prompt, options, ..
            } => {
                writeln!(stdout, "{prompt}")?;
                for (i, o) in options.iter().enumerate() {
                    writeln!(stdout, "  {}. {} [{}]", i + 1, o.text, o.id)?;
                }
            }
            ServerMessage::ExpressionCue {
                label,
                eye_color,
                animation,
                ..
            } => match animation {
                Some(a) => writeln!(stdout, "  (robot: {label}, eyes {eye_color}, plays {a})")?,
                None => writeln!(stdout, "  (robot: {label}, eyes {eye_color})")?,
            },
            ServerMessage::StateUpdate { finished: true, .. } => writeln!(stdout, "The end.")?,
            ServerMessage::StateUpdate { .. } => {}
            ServerMessage::Error { message, .. } => writeln!(stdout, "error: {message}")?,
        }
    }
    Ok(())
}

fn cmd_replay(path: &Path, stdout: &mut dyn Write) -> Result<i32, Failure> {
    let trace = SessionTrace::load(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    let report = replay(&trace).map_err(|e| check(e.to_string()))?;
    writeln!(stdout, "{report}")?;
    Ok(if report.is_ok() {
        EXIT_OK
    } else {
        EXIT_CHECK_FAILED
    })
}

fn cmd_validate(
    config: &SessionConfig,
    story: &str,
    stdout: &mut dyn Write,
) -> Result<i32, Failure> {
    let graph = match resolve_story(story) {
        Ok(g) => g,
        Err(StoryError::Invalid(violations)) => {
            writeln!(stdout, "story {story} is invalid:")?;
            for v in &violations {
                writeln!(stdout, "  {v}")?;
            }
            return Ok(EXIT_CHECK_FAILED);
        }
        Err(e) => return Err(e.into()),
    };
    let report = analyze_coverage(&graph, &config.pipeline());
    writeln!(
        stdout,
        "story {} ({}): {} nodes, {} paths",
        graph.id,
        graph.title,
        graph.nodes().count(),
        report.paths.len()
    )?;
    for path in &report.paths {
        let labels: Vec<&str> = path.labels().iter().map(|l| l.as_str()).collect();
        writeln!(stdout, "  {path}: {}", labels.join(", "))?;
    }
    if report.is_ok() {
        writeln!(stdout, "ok")?;
        Ok(EXIT_OK)
    } else {
        for issue in &report.issues {
            writeln!(stdout, "  {issue}")?;
        }
        Ok(EXIT_CHECK_FAILED)
    }
}

fn cmd_export(
    path: &Path,
    format: ExportFormat,
    out: Option<&Path>,
    stdout: &mut dyn Write,
) -> Result<i32, Failure> {
    let trace = SessionTrace::load(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    let mut file;
    let sink: &mut dyn Write = match out {
        Some(p) => {
            file = std::fs::File::create(p).map_err(|e| usage(format!("{}: {e}", p.display())))?;
            &mut file
        }
        None => stdout,
    };
    match format {
        ExportFormat::Csv => export_csv(&trace, sink).map_err(|e| usage(e.to_string()))?,
        ExportFormat::Jsonl => export_jsonl(&trace, sink)?,
    }
    Ok(EXIT_OK)
}

fn cmd_serve(
    config: SessionConfig,
    tcp: Option<String>,
    ws: Option<String>,
    trace_dir: Option<PathBuf>,
    stories: &[PathBuf],
    stdout: &mut dyn Write,
) -> Result<i32, Failure> {
    let extra = stories
        .iter()
        .map(load_story_file)
        .collect::<Result<Vec<_>, _>>()?;
    let server = crate::server::Server::new(config, extra, trace_dir);
    let mut handles = Vec::new();
    for (addr, ws) in [(tcp, false), (ws, true)] {
        let Some(addr) = addr else { continue };
        let listener =
            TcpListener::bind(&addr).map_err(|e| usage(format!("cannot bind {addr}: {e}")))?;
        writeln!(
            stdout,
            "listening on {} ({})",
            listener.local_addr()?,
            if ws { "websocket" } else { "tcp" }
        )?;
        let server = server.clone();
        handles.push(std::thread::spawn(move || {
            if ws {
                server.serve_ws(listener)
            } else {
                server.serve_tcp(listener)
            }
        }));
    }
    stdout.flush()?;
    for h in handles {
        h.join().map_err(|_| usage("server thread panicked"))??;
    }
    Ok(EXIT_OK)
}
