use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::SimError;

/// Fixed leading columns of `trace.csv`.
const FIXED_COLUMNS: [&str; 7] = [
    "time_s",
    "delta_f_hz",
    "rocof_hz_s",
    "p_load_mw",
    "p_dvpp_mw",
    "target_mw",
    "service_mw",
];

#[derive(Debug, Clone, PartialEq)]
pub struct TraceSample {
    pub time_s: f64,
    pub delta_f_hz: f64,
    pub rocof_hz_s: f64,
    /// Total load including load steps.
    pub p_load_mw: f64,
    /// Total DVPP output.
    pub p_dvpp_mw: f64,
    /// Sum of DVPP set-points.
    pub target_mw: f64,
    /// Sum of frequency-service offsets requested by the local controllers.
    pub service_mw: f64,
    /// Output of every scenario unit, in scenario order.
    pub unit_p_mw: Vec<f64>,
    /// Flow on every scenario line, in scenario order; zero once outaged.
    pub line_flows_mw: Vec<f64>,
    /// Events applied since the previous sample, as `t=<time>:<label>` joined
    /// by `;`.
    pub events: String,
}

/// One row of `dispatch.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DispatchRecord {
    pub time_s: f64,
    pub unit_id: String,
    pub p_set_mw: f64,
    pub reserve_mw: f64,
    pub status: String,
    pub objective: f64,
    pub reason: String,
}

/// One row of `controllers.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControllerRecord {
    pub time_s: f64,
    pub unit_id: String,
    pub dp_cmd_pu: f64,
    pub saturated: bool,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SimTrace {
    pub unit_ids: Vec<String>,
    /// `from-to` per line.
    pub line_labels: Vec<String>,
    pub samples: Vec<TraceSample>,
    pub dispatch: Vec<DispatchRecord>,
    pub controllers: Vec<ControllerRecord>,
    pub warnings: Vec<String>,
}

fn csv_err(e: impl std::fmt::Display) -> SimError {
    SimError::Csv(e.to_string())
}

impl SimTrace {
    /// `(time, label)` for every event recorded in the samples.
    pub fn event_log(&self) -> Vec<(f64, String)> {
        self.samples
            .iter()
            .flat_map(|s| s.events.split(';').filter(|e| !e.is_empty()))
            .filter_map(|e| {
                let rest = e.strip_prefix("t=")?;
                let (t, label) = rest.split_once(':')?;
                Some((t.parse().ok()?, label.to_string()))
            })
            .collect()
    }

    pub fn unit_column(&self, id: &str) -> Option<Vec<f64>> {
        let i = self.unit_ids.iter().position(|u| u == id)?;
        Some(self.samples.iter().map(|s| s.unit_p_mw[i]).collect())
    }

    pub fn header(&self) -> Vec<String> {
        FIXED_COLUMNS
            .iter()
            .map(|c| c.to_string())
            .chain(self.unit_ids.iter().map(|u| format!("p_{u}_mw")))
            .chain(self.line_labels.iter().map(|l| format!("flow_{}_mw", l.replace('-', "_"))))
            .chain(std::iter::once("events".to_string()))
            .collect()
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<(), SimError> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(self.header()).map_err(csv_err)?;
        for s in &self.samples {
            let fixed = [s.time_s, s.delta_f_hz, s.rocof_hz_s, s.p_load_mw, s.p_dvpp_mw, s.target_mw, s.service_mw];
            let row = fixed
                .iter()
                .chain(&s.unit_p_mw)
                .chain(&s.line_flows_mw)
                .map(|v| v.to_string())
                .chain(std::iter::once(s.events.clone()));
            out.write_record(row).map_err(csv_err)?;
        }
        out.flush().map_err(csv_err)
    }

    /// Reads a trace written by [`SimTrace::write_csv`]. Dispatch and
    /// controller logs live in their own files and are left empty.
    pub fn read_csv<R: Read>(r: R) -> Result<SimTrace, SimError> {
        let mut rdr = csv::Reader::from_reader(r);
        let header: Vec<String> = rdr.headers().map_err(csv_err)?.iter().map(String::from).collect();
        let n = header.len();
        if n < FIXED_COLUMNS.len() + 1
            || header[..FIXED_COLUMNS.len()] != FIXED_COLUMNS
            || header[n - 1] != "events"
        {
            return Err(SimError::Csv("unexpected trace header".into()));
        }
        let middle = &header[FIXED_COLUMNS.len()..n - 1];
        let mut unit_ids = Vec::new();
        let mut line_labels = Vec::new();
        for c in middle {
            if let Some(flow) = c.strip_prefix("flow_").and_then(|c| c.strip_suffix("_mw")) {
                line_labels.push(flow.replacen('_', "-", 1));
            } else if let Some(u) = c.strip_prefix("p_").and_then(|c| c.strip_suffix("_mw")) {
                if !line_labels.is_empty() {
                    return Err(SimError::Csv(format!("unit column `{c}` after flow columns")));
                }
                unit_ids.push(u.to_string());
            } else {
                return Err(SimError::Csv(format!("unknown column `{c}`")));
            }
        }
        let mut samples = Vec::new();
        for (row, rec) in rdr.records().enumerate() {
            let rec = rec.map_err(csv_err)?;
            let num = |i: usize| -> Result<f64, SimError> {
                rec[i]
                    .parse()
                    .map_err(|_| SimError::Csv(format!("row {}: column `{}` is not a number", row + 1, header[i])))
            };
            let nu = unit_ids.len();
            let k = FIXED_COLUMNS.len();
            samples.push(TraceSample {
                time_s: num(0)?,
                delta_f_hz: num(1)?,
                rocof_hz_s: num(2)?,
                p_load_mw: num(3)?,
                p_dvpp_mw: num(4)?,
                target_mw: num(5)?,
                service_mw: num(6)?,
                unit_p_mw: (k..k + nu).map(num).collect::<Result<_, _>>()?,
                line_flows_mw: (k + nu..n - 1).map(num).collect::<Result<_, _>>()?,
                events: rec[n - 1].to_string(),
            });
        }
        Ok(SimTrace {
            unit_ids,
            line_labels,
            samples,
            ..SimTrace::default()
        })
    }

    pub fn write_dispatch_csv<W: Write>(&self, w: W) -> Result<(), SimError> {
        write_records(w, &self.dispatch)
    }

    pub fn read_dispatch_csv<R: Read>(r: R) -> Result<Vec<DispatchRecord>, SimError> {
        csv::Reader::from_reader(r)
            .deserialize()
            .collect::<Result<_, _>>()
            .map_err(csv_err)
    }

    pub fn write_controllers_csv<W: Write>(&self, w: W) -> Result<(), SimError> {
        write_records(w, &self.controllers)
    }
}

fn write_records<W: Write, T: Serialize>(w: W, records: &[T]) -> Result<(), SimError> {
    let mut out = csv::Writer::from_writer(w);
    for r in records {
        out.serialize(r).map_err(csv_err)?;
    }
    out.flush().map_err(csv_err)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(t: f64, events: &str) -> TraceSample {
        TraceSample {
            time_s: t,
            delta_f_hz: -0.1 * t,
            rocof_hz_s: 1.0 / 3.0,
            p_load_mw: 100.0,
            p_dvpp_mw: 55.000000000000014,
            target_mw: 55.0,
            service_mw: 1e-17,
            unit_p_mw: vec![1.0, 2.5],
            line_flows_mw: vec![-3.25],
            events: events.to_string(),
        }
    }

    fn trace() -> SimTrace {
        SimTrace {
            unit_ids: vec!["A".into(), "B_2".into()],
            line_labels: vec!["1-2".into()],
            samples: vec![sample(0.0, ""), sample(0.1, "t=0.05:unit_trip:A;t=0.1:load_step:2:5")],
            ..SimTrace::default()
        }
    }

    #[test]
    fn csv_round_trip_is_lossless() {
        let t = trace();
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        let back = SimTrace::read_csv(buf.as_slice()).unwrap();
        assert_eq!(back, t);
    }

    #[test]
    fn header_names_units() {
        assert_eq!(
            trace().header().join(","),
            "time_s,delta_f_hz,rocof_hz_s,p_load_mw,p_dvpp_mw,target_mw,service_mw,p_A_mw,p_B_2_mw,flow_1_2_mw,events"
        );
    }

    #[test]
    fn event_log_parses_labels() {
        assert_eq!(
            trace().event_log(),
            vec![(0.05, "unit_trip:A".to_string()), (0.1, "load_step:2:5".to_string())]
        );
    }

    #[test]
    fn dispatch_round_trip() {
        let mut t = trace();
        t.dispatch.push(DispatchRecord {
            time_s: 0.0,
            unit_id: "A".into(),
            p_set_mw: 1.5,
            reserve_mw: 0.25,
            status: "optimal".into(),
            objective: 12.0,
            reason: "initial".into(),
        });
        let mut buf = Vec::new();
        t.write_dispatch_csv(&mut buf).unwrap();
        assert!(String::from_utf8(buf.clone()).unwrap().starts_with("time_s,unit_id,p_set_mw,reserve_mw,status,objective,reason\n"));
        assert_eq!(SimTrace::read_dispatch_csv(buf.as_slice()).unwrap(), t.dispatch);
    }

    #[test]
    fn rejects_foreign_header() {
        assert!(SimTrace::read_csv("a,b\n1,2\n".as_bytes()).is_err());
    }
}
