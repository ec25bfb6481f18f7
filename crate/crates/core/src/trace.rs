//! Solver progress events and the sink they are reported to.

use std::time::Instant;

use ndarray::ArrayView1;

use crate::risk::WorkCounter;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EventKind {
    /// Initial point, before any work.
    Start,
    WarmupDone,
    StepAccepted,
    StepBacktracked,
    /// One epoch (n sample gradients) of a stochastic baseline.
    Epoch,
    Finished,
}

impl EventKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EventKind::Start => "start",
            EventKind::WarmupDone => "warmup_done",
            EventKind::StepAccepted => "step_accepted",
            EventKind::StepBacktracked => "step_backtracked",
            EventKind::Epoch => "epoch",
            EventKind::Finished => "finished",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceEvent {
    pub kind: EventKind,
    /// Sample size the solver is working at.
    pub n: usize,
    pub work: WorkCounter,
    /// `work.grad_units / N`.
    pub passes: f64,
    /// `||grad R_n(w)||` when the solver computed it anyway.
    pub grad_norm: Option<f64>,
    /// Newton decrement at the step's starting point, when computed.
    pub decrement: Option<f64>,
    /// Seconds since the solver started, excluding time spent in the sink.
    pub elapsed: f64,
}

/// Receives every event together with the iterate it describes.
pub trait TraceSink {
    fn record(&mut self, event: &TraceEvent, w: ArrayView1<f64>);
}

/// Discards everything.
pub struct NullSink;

impl TraceSink for NullSink {
    fn record(&mut self, _: &TraceEvent, _: ArrayView1<f64>) {}
}

impl<F: FnMut(&TraceEvent, ArrayView1<f64>)> TraceSink for F {
    fn record(&mut self, event: &TraceEvent, w: ArrayView1<f64>) {
        self(event, w)
    }
}

/// Keeps the event list and forwards each event to a sink.
pub(crate) struct Recorder<'a> {
    sink: &'a mut dyn TraceSink,
    start: Instant,
    /// Time spent inside the sink, excluded from `elapsed`.
    sink_time: f64,
    total: usize,
    pub events: Vec<TraceEvent>,
}

impl<'a> Recorder<'a> {
    pub fn new(sink: &'a mut dyn TraceSink, total: usize) -> Self {
        Recorder {
            sink,
            start: Instant::now(),
            sink_time: 0.0,
            total,
            events: Vec::new(),
        }
    }

    /// Seconds since construction, not counting time spent in the sink.
    pub fn elapsed(&self) -> f64 {
        self.start.elapsed().as_secs_f64() - self.sink_time
    }

    pub fn emit(
        &mut self,
        kind: EventKind,
        n: usize,
        work: WorkCounter,
        grad_norm: Option<f64>,
        decrement: Option<f64>,
        w: ArrayView1<f64>,
    ) {
        let ev = TraceEvent {
            kind,
            n,
            work,
            passes: work.passes(self.total),
            grad_norm,
            decrement,
            elapsed: self.elapsed(),
        };
        let before = Instant::now();
        self.sink.record(&ev, w);
        self.sink_time += before.elapsed().as_secs_f64();
        self.events.push(ev);
    }
}
