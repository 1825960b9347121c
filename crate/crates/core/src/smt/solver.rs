use std::collections::HashMap;
use std::io::{Read, Write};
use std::path::PathBuf;
use std::process::{Command, Stdio};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::time::{Duration, Instant};

use parking_lot::Mutex;

use super::encode::render;
use super::{SolverQuery, Verdict};
use crate::error::{Error, Result};
use crate::prim::PredicateRegistry;
use crate::syntax::Prop;

#[derive(Clone, Debug)]
pub struct SolverConfig {
    pub path: PathBuf,
    pub timeout_ms: u64,
    /// When set, every dispatched script is written here as
    /// `<n>_<origin>.smt2`.
    pub dump_dir: Option<PathBuf>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig { path: PathBuf::from("z3"), timeout_ms: 10_000, dump_dir: None }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SolverStats {
    pub queries: usize,
    pub cache_hits: usize,
}

/// Drives an external SMT-LIB solver, one process per query. Safe to share
/// across threads; verdicts are cached by script text.
pub struct Solver {
    cfg: SolverConfig,
    reg: PredicateRegistry,
    cache: Mutex<HashMap<String, Verdict>>,
    next_id: AtomicUsize,
    hits: AtomicUsize,
    log: Mutex<Vec<SolverQuery>>,
}

fn sanitize_origin(origin: &str) -> String {
    let s: String = origin.chars().map(|c| if c.is_ascii_alphanumeric() || c == '-' { c } else { '_' }).collect();
    s.chars().take(60).collect()
}

impl Solver {
    pub fn new(cfg: SolverConfig, reg: PredicateRegistry) -> Self {
        Solver {
            cfg,
            reg,
            cache: Mutex::new(HashMap::new()),
            next_id: AtomicUsize::new(0),
            hits: AtomicUsize::new(0),
            log: Mutex::new(Vec::new()),
        }
    }

    pub fn registry(&self) -> &PredicateRegistry {
        &self.reg
    }

    pub fn config(&self) -> &SolverConfig {
        &self.cfg
    }

    /// Checks that the solver executable can be started.
    pub fn probe(&self) -> Result<()> {
        Command::new(&self.cfg.path)
            .arg("-version")
            .stdout(Stdio::null())
            .stderr(Stdio::null())
            .status()
            .map(|_| ())
            .map_err(|e| Error::SolverUnavailable(format!("{}: {e}", self.cfg.path.display())))
    }

    pub fn stats(&self) -> SolverStats {
        SolverStats { queries: self.next_id.load(Ordering::SeqCst), cache_hits: self.hits.load(Ordering::SeqCst) }
    }

    /// Every query dispatched so far, in id order.
    pub fn queries(&self) -> Vec<SolverQuery> {
        let mut v = self.log.lock().clone();
        v.sort_by_key(|q| q.id);
        v
    }

    /// Decides validity of a closed goal; returns the verdict and the query id.
    pub fn check_valid(&self, goal: &Prop, origin: &str) -> Result<(Verdict, usize)> {
        let enc = render(goal, &self.reg, origin)?;
        let id = self.next_id.fetch_add(1, Ordering::SeqCst);
        if let Some(dir) = &self.cfg.dump_dir {
            let path = dir.join(format!("{id}_{}.smt2", sanitize_origin(origin)));
            std::fs::write(&path, &enc.text).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        }
        // The leading origin comment differs between otherwise identical queries.
        let key = enc.text.split_once('\n').map_or(enc.text.as_str(), |(_, rest)| rest).to_string();
        let cached = self.cache.lock().get(&key).copied();
        let verdict = match cached {
            Some(v) => {
                self.hits.fetch_add(1, Ordering::Relaxed);
                v
            }
            None => {
                let v = self.run(&enc.text)?;
                self.cache.lock().insert(key, v);
                v
            }
        };
        log::debug!("query {id} ({origin}): {verdict}");
        self.log.lock().push(SolverQuery {
            id,
            origin: origin.to_string(),
            goal: enc.prenex,
            smt_text: enc.text,
            verdict,
        });
        Ok((verdict, id))
    }

    fn spawn(&self, script: &str, extra: &[&str]) -> Result<Running> {
        let mut child = Command::new(&self.cfg.path)
            .arg("-in")
            .arg("-smt2")
            .arg(format!("-t:{}", self.cfg.timeout_ms))
            .args(extra)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::piped())
            .spawn()
            .map_err(|e| Error::SolverUnavailable(format!("{}: {e}", self.cfg.path.display())))?;
        {
            let mut stdin = child.stdin.take().expect("piped stdin");
            stdin.write_all(script.as_bytes()).map_err(|e| Error::SolverCrashed(e.to_string()))?;
        }
        let mut stdout = child.stdout.take().expect("piped stdout");
        let reader = std::thread::spawn(move || {
            let mut s = String::new();
            let _ = stdout.read_to_string(&mut s);
            s
        });
        Ok(Running { child, reader: Some(reader) })
    }

    /// Runs a small portfolio of solver configurations side by side and
    /// keeps the first definite answer. Pattern-based instantiation finds
    /// countermodels quickly; model-based instantiation alone finds the
    /// arithmetic witnesses (e.g. `lo + 1`) that patterns never propose; and
    /// model search over the datatype axioms is sensitive to the seed. No
    /// single configuration is reliable across the datatype obligations.
    fn run(&self, script: &str) -> Result<Verdict> {
        let mut procs = Vec::new();
        for extra in PORTFOLIO {
            procs.push(self.spawn(script, extra)?);
        }
        // The solver's own timeout is soft; enforce a hard wall-clock limit.
        let deadline = Instant::now() + Duration::from_millis(self.cfg.timeout_ms + 2_000);
        let mut settled = Vec::new();
        while !procs.is_empty() {
            let mut i = 0;
            while i < procs.len() {
                match procs[i].child.try_wait().map_err(|e| Error::SolverCrashed(e.to_string()))? {
                    Some(st) => {
                        let mut p = procs.swap_remove(i);
                        let v = p.verdict(st);
                        if matches!(v, Ok(Verdict::Valid | Verdict::Invalid)) {
                            procs.iter_mut().for_each(Running::kill);
                            return v;
                        }
                        settled.push(v);
                    }
                    None => i += 1,
                }
            }
            if Instant::now() >= deadline {
                procs.iter_mut().for_each(Running::kill);
                settled.push(Ok(Verdict::Timeout));
                break;
            }
            std::thread::sleep(Duration::from_millis(2));
        }
        // No definite answer: report an error first, then unknown over timeout.
        let rank = |v: &Result<Verdict>| match v {
            Err(_) => 0,
            Ok(Verdict::Unknown) => 1,
            Ok(_) => 2,
        };
        settled.sort_by_key(rank);
        settled.into_iter().next().unwrap_or(Ok(Verdict::Timeout))
    }
}

const PORTFOLIO: &[&[&str]] = &[&[], &["smt.ematching=false"], &["smt.random_seed=1"]];

struct Running {
    child: std::process::Child,
    reader: Option<std::thread::JoinHandle<String>>,
}

impl Running {
    fn kill(&mut self) {
        let _ = self.child.kill();
        let _ = self.child.wait();
    }

    fn verdict(&mut self, status: std::process::ExitStatus) -> Result<Verdict> {
        let out = self.reader.take().map(|r| r.join().unwrap_or_default()).unwrap_or_default();
        let first = out.lines().map(str::trim).find(|l| !l.is_empty()).unwrap_or("");
        match first {
            "unsat" => Ok(Verdict::Valid),
            "sat" => Ok(Verdict::Invalid),
            "unknown" => Ok(Verdict::Unknown),
            "timeout" => Ok(Verdict::Timeout),
            l if l.starts_with("(error") => Err(Error::ProtocolError(out.trim().to_string())),
            _ if !status.success() => Err(Error::SolverCrashed(format!("exit status {status}: {}", out.trim()))),
            _ => Err(Error::ProtocolError(format!("unexpected solver output: {}", out.trim()))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_prop;

    fn solver() -> Solver {
        Solver::new(SolverConfig::default(), PredicateRegistry::builtin())
    }

    #[test]
    fn trivial_verdicts() {
        let s = solver();
        let valid = parse_prop("forall x:int. x + 1 > x").unwrap();
        assert_eq!(s.check_valid(&valid, "t").unwrap().0, Verdict::Valid);
        let invalid = parse_prop("forall x:int. x = 1").unwrap();
        assert_eq!(s.check_valid(&invalid, "t").unwrap().0, Verdict::Invalid);
    }

    #[test]
    fn cache_hits_on_repeat() {
        let s = solver();
        let p = parse_prop("forall x:nat. x >= 0").unwrap();
        s.check_valid(&p, "a").unwrap();
        s.check_valid(&p, "b").unwrap();
        assert_eq!(s.stats(), SolverStats { queries: 2, cache_hits: 1 });
    }

    #[test]
    fn missing_solver_is_reported() {
        let s = Solver::new(
            SolverConfig { path: "/nonexistent/z3".into(), ..SolverConfig::default() },
            PredicateRegistry::builtin(),
        );
        let p = parse_prop("forall x:int. x = x + 0").unwrap();
        // Trivial goals still go to the solver.
        assert!(matches!(s.check_valid(&p, "t"), Err(Error::SolverUnavailable(_))));
    }
}
