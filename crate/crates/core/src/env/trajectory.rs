use std::io::Write;

use crate::error::{Error, Result};

/// Debug dump of `(state, action, reward)` triples as CSV.
pub struct TrajectoryRecorder<W: Write> {
    out: W,
    header_written: bool,
}

impl<W: Write> TrajectoryRecorder<W> {
    pub fn new(out: W) -> Self {
        Self {
            out,
            header_written: false,
        }
    }

    pub fn record(&mut self, episode: usize, step: usize, state: &[f64], action: usize, reward: f64) -> Result<()> {
        let io = |e| Error::io("<trajectory>", e);
        if !self.header_written {
            let cols: Vec<String> = (0..state.len()).map(|i| format!("s_{i}")).collect();
            writeln!(self.out, "episode,step,{},action,reward", cols.join(",")).map_err(io)?;
            self.header_written = true;
        }
        let vals: Vec<String> = state.iter().map(|v| v.to_string()).collect();
        writeln!(self.out, "{episode},{step},{},{action},{reward}", vals.join(",")).map_err(io)
    }

    pub fn into_inner(self) -> W {
        self.out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn writes_header_once() {
        let mut rec = TrajectoryRecorder::new(Vec::new());
        rec.record(0, 0, &[0.5, -1.0], 1, 1.0).unwrap();
        rec.record(0, 1, &[0.25, 0.0], 0, 1.0).unwrap();
        let text = String::from_utf8(rec.into_inner()).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "episode,step,s_0,s_1,action,reward");
        assert_eq!(lines[1], "0,0,0.5,-1,1,1");
        assert_eq!(lines.len(), 3);
    }
}
