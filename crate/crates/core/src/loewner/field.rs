use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::carath::{certify_mg_with, CertifyOptions, HolMap, MgCertificate, Polynomial};
use crate::disc::{DiscFunction, DiscSpec};
use crate::geometry::BallGeometry;
use crate::{LabError, Result, C};

/// One piece `h(z, t) = map(z)` for `t` in `[start, next start)`.
#[derive(Debug, Clone)]
pub struct FieldSegment {
    pub start: f64,
    pub map: HolMap,
    pub certificate: Option<MgCertificate>,
}

/// Piecewise-constant Herglotz vector field. The last segment extends
/// autonomously beyond its start.
#[derive(Debug, Clone)]
pub struct HerglotzField {
    g: DiscFunction,
    domain: BallGeometry,
    segments: Vec<FieldSegment>,
}

impl HerglotzField {
    /// Validated schedule without certificates. Start times must increase
    /// strictly from 0 and every map must be normalized on `domain`.
    pub fn new(g: DiscFunction, domain: BallGeometry, schedule: Vec<(f64, HolMap)>) -> Result<Self> {
        if schedule.is_empty() {
            return Err(LabError::InvalidParameter("empty field schedule".into()));
        }
        if schedule[0].0 != 0.0 {
            return Err(LabError::InvalidParameter(format!(
                "schedule must start at t = 0, got {}",
                schedule[0].0
            )));
        }
        for w in schedule.windows(2) {
            if !(w[1].0 > w[0].0) || !w[1].0.is_finite() {
                return Err(LabError::InvalidParameter(format!(
                    "schedule times must increase strictly: {} then {}",
                    w[0].0, w[1].0
                )));
            }
        }
        for (_, m) in &schedule {
            if m.domain() != domain {
                return Err(LabError::InvalidParameter(format!(
                    "segment `{}` lives on another domain",
                    m.label()
                )));
            }
            m.check_normalized()?;
        }
        let segments = schedule
            .into_iter()
            .map(|(start, map)| FieldSegment {
                start,
                map,
                certificate: None,
            })
            .collect();
        Ok(Self { g, domain, segments })
    }

    pub fn autonomous(g: DiscFunction, h: HolMap) -> Result<Self> {
        let domain = h.domain();
        Self::new(g, domain, vec![(0.0, h)])
    }

    /// Like [`Self::new`], then certifies every segment; fails with a
    /// precondition error naming the first segment outside `M_g`.
    pub fn certified<R: Rng>(
        g: DiscFunction,
        domain: BallGeometry,
        schedule: Vec<(f64, HolMap)>,
        opts: &CertifyOptions,
        rng: &mut R,
    ) -> Result<Self> {
        let mut field = Self::new(g, domain, schedule)?;
        if let Some(k) = field.certify(opts, rng)? {
            return Err(LabError::Precondition(format!(
                "segment {k} (`{}`) failed M_g certification",
                field.segments[k].map.label()
            )));
        }
        Ok(field)
    }

    /// Attaches certificates; returns the index of the first failing
    /// segment, if any.
    pub fn certify<R: Rng>(&mut self, opts: &CertifyOptions, rng: &mut R) -> Result<Option<usize>> {
        let mut first_fail = None;
        for (k, seg) in self.segments.iter_mut().enumerate() {
            let cert = certify_mg_with(&seg.map, &self.g, &self.domain, opts, rng)?;
            if !cert.pass && first_fail.is_none() {
                first_fail = Some(k);
            }
            seg.certificate = Some(cert);
        }
        Ok(first_fail)
    }

    pub fn is_certified(&self) -> bool {
        self.segments
            .iter()
            .all(|s| s.certificate.as_ref().is_some_and(|c| c.pass))
    }

    pub fn g(&self) -> &DiscFunction {
        &self.g
    }

    pub fn domain(&self) -> BallGeometry {
        self.domain
    }

    pub fn segments(&self) -> &[FieldSegment] {
        &self.segments
    }

    /// Start of the last segment.
    pub fn horizon(&self) -> f64 {
        self.segments.last().map_or(0.0, |s| s.start)
    }

    /// Index of the segment active at `t`.
    pub fn segment_index(&self, t: f64) -> usize {
        self.segments
            .partition_point(|s| s.start <= t)
            .saturating_sub(1)
    }

    pub fn map_at(&self, t: f64) -> &HolMap {
        &self.segments[self.segment_index(t)].map
    }

    /// First breakpoint strictly after `t`.
    pub(crate) fn next_breakpoint(&self, t: f64) -> f64 {
        self.segments
            .iter()
            .map(|s| s.start)
            .find(|&b| b > t)
            .unwrap_or(f64::INFINITY)
    }

    /// `h(z, t)`.
    pub fn eval(&self, z: &[C], t: f64) -> Result<crate::CVec> {
        self.domain.check_dim(z)?;
        Ok(self.map_at(t).eval_raw(z))
    }

    /// Applies `f` to every segment map; certificates are dropped.
    pub fn map_segments<F>(&self, f: F) -> Result<Self>
    where
        F: Fn(&HolMap) -> Result<HolMap>,
    {
        let schedule = self
            .segments
            .iter()
            .map(|s| Ok((s.start, f(&s.map)?)))
            .collect::<Result<Vec<_>>>()?;
        Self::new(self.g.clone(), self.domain, schedule)
    }

    pub fn record(&self) -> FieldRecord {
        FieldRecord {
            g: self.g.spec(),
            g_family: self.g.family_name().to_string(),
            domain: self.domain,
            segments: self
                .segments
                .iter()
                .map(|s| SegmentRecord {
                    start: s.start,
                    label: s.map.label().to_string(),
                    polynomial: s.map.as_polynomial().cloned(),
                    certificate: s.certificate.clone(),
                })
                .collect(),
        }
    }

    /// Rebuilds a field whose segments are all polynomial.
    pub fn from_record(rec: &FieldRecord) -> Result<Self> {
        let spec = rec
            .g
            .as_ref()
            .ok_or_else(|| LabError::Unsupported("custom disc functions do not deserialize".into()))?;
        let g = DiscFunction::try_from(spec)?;
        let mut schedule = Vec::with_capacity(rec.segments.len());
        for s in &rec.segments {
            let p = s.polynomial.clone().ok_or_else(|| {
                LabError::Unsupported(format!("segment `{}` has no polynomial payload", s.label))
            })?;
            schedule.push((s.start, HolMap::polynomial(rec.domain, p, s.label.clone())?));
        }
        let mut field = Self::new(g, rec.domain, schedule)?;
        for (seg, r) in field.segments.iter_mut().zip(&rec.segments) {
            seg.certificate = r.certificate.clone();
        }
        Ok(field)
    }
}

/// JSON form of a field: times, labels, polynomial payloads where
/// available, and certificates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldRecord {
    pub g: Option<DiscSpec>,
    pub g_family: String,
    pub domain: BallGeometry,
    pub segments: Vec<SegmentRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentRecord {
    pub start: f64,
    pub label: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub polynomial: Option<Polynomial>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub certificate: Option<MgCertificate>,
}

impl Serialize for HerglotzField {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.record().serialize(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::carath::canonical_field;
    use crate::seeded_rng;

    fn dom() -> BallGeometry {
        BallGeometry::polydisc(2).unwrap()
    }

    #[test]
    fn schedule_validation() {
        let g = DiscFunction::Moebius;
        let id = HolMap::identity(dom());
        assert!(HerglotzField::new(g.clone(), dom(), vec![]).is_err());
        assert!(HerglotzField::new(g.clone(), dom(), vec![(0.5, id.clone())]).is_err());
        assert!(HerglotzField::new(g.clone(), dom(), vec![(0.0, id.clone()), (0.0, id.clone())]).is_err());
        let other = HolMap::identity(BallGeometry::polydisc(3).unwrap());
        assert!(HerglotzField::new(g.clone(), dom(), vec![(0.0, other)]).is_err());
        let f = HerglotzField::new(g, dom(), vec![(0.0, id.clone()), (0.5, id)]).unwrap();
        assert_eq!(f.segment_index(0.49), 0);
        assert_eq!(f.segment_index(0.5), 1);
        assert_eq!(f.segment_index(100.0), 1);
        assert_eq!(f.next_breakpoint(0.0), 0.5);
        assert_eq!(f.next_breakpoint(0.5), f64::INFINITY);
    }

    #[test]
    fn certified_rejects_inflated_segment() {
        let g = DiscFunction::Moebius;
        let mut p = Polynomial::identity(2);
        p.push_square(2, 0, 1, C::new(1.2, 0.0));
        let bad = HolMap::polynomial(dom(), p, "bad").unwrap();
        let opts = CertifyOptions::light(200);
        let res = HerglotzField::certified(g, dom(), vec![(0.0, bad)], &opts, &mut seeded_rng(0));
        assert!(matches!(res, Err(LabError::Precondition(_))));
    }

    #[test]
    fn record_round_trip() {
        let g = DiscFunction::starlike_order(0.25).unwrap();
        let h = canonical_field(&g, &dom(), 0, 1, 1).unwrap();
        let f = HerglotzField::certified(
            g,
            dom(),
            vec![(0.0, HolMap::identity(dom())), (0.5, h)],
            &CertifyOptions::light(100),
            &mut seeded_rng(3),
        )
        .unwrap();
        assert!(f.is_certified());
        let json = serde_json::to_string(&f).unwrap();
        let rec: FieldRecord = serde_json::from_str(&json).unwrap();
        let back = HerglotzField::from_record(&rec).unwrap();
        assert_eq!(back.record(), f.record());
    }
}
