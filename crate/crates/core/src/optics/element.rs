use std::fmt;

/// The optical elements the `.oct` grammar knows about.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ElementKind {
    Hwp,
    Qwp,
    Polarizer,
    CalciteSplit,
    CalciteMerge,
    /// A half-wave plate covering a single path of the interferometer.
    SemicircleHwp,
    Dichroic,
    Detector,
}

impl ElementKind {
    pub fn requires_angle(&self) -> bool {
        matches!(
            self,
            ElementKind::Hwp | ElementKind::Qwp | ElementKind::Polarizer | ElementKind::SemicircleHwp
        )
    }

    /// Whole-beam elements cannot carry a `path=` selector.
    pub fn allows_path_selector(&self) -> bool {
        !matches!(
            self,
            ElementKind::CalciteSplit | ElementKind::CalciteMerge | ElementKind::Dichroic
        )
    }

    pub fn keyword(&self) -> &'static str {
        match self {
            ElementKind::Hwp => "hwp",
            ElementKind::Qwp => "qwp",
            ElementKind::Polarizer => "polarizer",
            ElementKind::CalciteSplit => "calcite split",
            ElementKind::CalciteMerge => "calcite merge",
            ElementKind::SemicircleHwp => "semihwp",
            ElementKind::Dichroic => "dichroic",
            ElementKind::Detector => "detector",
        }
    }
}

/// Which interferometer path an element acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PathSelector {
    Upper,
    Lower,
    #[default]
    Both,
}

impl fmt::Display for PathSelector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PathSelector::Upper => write!(f, "U"),
            PathSelector::Lower => write!(f, "L"),
            PathSelector::Both => write!(f, "both"),
        }
    }
}

/// One parsed element of an optical table.
#[derive(Debug, Clone, PartialEq)]
pub struct OpticalElement {
    pub kind: ElementKind,
    /// Fast-axis / transmission-axis angle, normalized to `[0°, 180°)`.
    /// Present iff the kind requires it.
    pub angle_deg: Option<f64>,
    pub path: PathSelector,
    pub label: Option<String>,
}

impl OpticalElement {
    pub fn new(kind: ElementKind, angle_deg: Option<f64>) -> Self {
        OpticalElement {
            kind,
            angle_deg: angle_deg.map(normalize_angle),
            path: PathSelector::Both,
            label: None,
        }
    }

    pub fn with_path(mut self, path: PathSelector) -> Self {
        self.path = path;
        self
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }
}

pub fn normalize_angle(angle_deg: f64) -> f64 {
    let a = angle_deg.rem_euclid(180.0);
    if a == 180.0 {
        0.0
    } else {
        a
    }
}

/// Declares the mode labels of the 4-dimensional photon space. The basis
/// order is fixed project-wide as `path ⊗ polarization` =
/// `[UH, UV, LH, LV]` with the path factor most significant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModeSpace {
    pub paths: [char; 2],
    pub polarizations: [char; 2],
}

impl Default for ModeSpace {
    fn default() -> Self {
        ModeSpace {
            paths: ['U', 'L'],
            polarizations: ['H', 'V'],
        }
    }
}

/// A parsed optical table: an ordered element list over the fixed
/// (path ⊗ polarization) mode space.
#[derive(Debug, Clone, PartialEq)]
pub struct Circuit {
    pub elements: Vec<OpticalElement>,
    pub mode_space: ModeSpace,
}

impl Circuit {
    pub fn new(elements: Vec<OpticalElement>) -> Self {
        Circuit {
            elements,
            mode_space: ModeSpace::default(),
        }
    }

    /// Returns a copy with the angle of the element labelled `label`
    /// replaced. Used by the experiment harness to sweep analyzer
    /// settings without re-parsing.
    pub fn with_angle(&self, label: &str, angle_deg: f64) -> crate::Result<Circuit> {
        let mut out = self.clone();
        let mut found = false;
        for el in &mut out.elements {
            if el.label.as_deref() == Some(label) {
                if !el.kind.requires_angle() {
                    return Err(crate::Error::invalid(format!(
                        "element '{label}' takes no angle"
                    )));
                }
                el.angle_deg = Some(normalize_angle(angle_deg));
                found = true;
            }
        }
        if !found {
            return Err(crate::Error::invalid(format!("no element labelled '{label}'")));
        }
        Ok(out)
    }

    pub fn find(&self, label: &str) -> Option<&OpticalElement> {
        self.elements.iter().find(|e| e.label.as_deref() == Some(label))
    }

    /// Canonical source form; `parse(print(parse(s)))` is a fixed point.
    pub fn to_source(&self) -> String {
        let mut out = String::new();
        for el in &self.elements {
            out.push_str(el.kind.keyword());
            if let Some(angle) = el.angle_deg {
                out.push_str(&format!(" @ {}", format_angle(angle)));
            }
            match el.path {
                PathSelector::Both => {}
                PathSelector::Upper => out.push_str(" path=U"),
                PathSelector::Lower => out.push_str(" path=L"),
            }
            if let Some(label) = &el.label {
                out.push_str(&format!(" label={label}"));
            }
            out.push('\n');
        }
        out
    }
}

fn format_angle(angle: f64) -> String {
    // Shortest decimal that round-trips, so reparsing is exact.
    let mut s = format!("{angle}");
    if !s.contains('.') && !s.contains('e') {
        s.push_str(".0");
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn angles_normalize_into_half_turn() {
        assert_eq!(normalize_angle(190.0), 10.0);
        assert_eq!(normalize_angle(-45.0), 135.0);
        assert_eq!(normalize_angle(180.0), 0.0);
        assert_eq!(normalize_angle(22.5), 22.5);
    }

    #[test]
    fn with_angle_patches_labelled_element() {
        let circuit = Circuit::new(vec![
            OpticalElement::new(ElementKind::Polarizer, Some(0.0)).with_label("P2"),
            OpticalElement::new(ElementKind::Detector, None).with_label("APD2"),
        ]);
        let patched = circuit.with_angle("P2", 45.0).unwrap();
        assert_eq!(patched.find("P2").unwrap().angle_deg, Some(45.0));
        assert!(circuit.with_angle("APD2", 10.0).is_err());
        assert!(circuit.with_angle("nope", 10.0).is_err());
    }
}
