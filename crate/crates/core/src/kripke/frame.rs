use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use serde::{Deserialize, Serialize};

use super::KripkeError;

/// Finite Kripke frame with an atomic valuation.
///
/// Successor lists are kept in world declaration order; every scan over
/// successors (and therefore every witness search) follows that order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KripkeFrame {
    worlds: Vec<String>,
    index: HashMap<String, usize>,
    successors: Vec<Vec<usize>>,
    valuation: Vec<BTreeSet<String>>,
}

impl KripkeFrame {
    /// Builds a frame. Worlds missing from `valuation` get an empty atom set;
    /// valuation keys naming undeclared worlds are rejected.
    pub fn new<W, E, V>(worlds: W, edges: E, valuation: V) -> Result<Self, KripkeError>
    where
        W: IntoIterator,
        W::Item: Into<String>,
        E: IntoIterator<Item = (String, String)>,
        V: IntoIterator<Item = (String, Vec<String>)>,
    {
        let worlds: Vec<String> = worlds.into_iter().map(Into::into).collect();
        let mut index = HashMap::with_capacity(worlds.len());
        for (i, w) in worlds.iter().enumerate() {
            if w.is_empty() {
                return Err(KripkeError::EmptyWorldName);
            }
            if index.insert(w.clone(), i).is_some() {
                return Err(KripkeError::DuplicateWorld(w.clone()));
            }
        }
        let lookup = |name: &str| index.get(name).copied().ok_or_else(|| KripkeError::UnknownWorld(name.to_string()));

        let mut successors = vec![Vec::new(); worlds.len()];
        for (from, to) in edges {
            let (i, j) = (lookup(&from)?, lookup(&to)?);
            successors[i].push(j);
        }
        for list in &mut successors {
            list.sort_unstable();
            list.dedup();
        }

        let mut atoms = vec![BTreeSet::new(); worlds.len()];
        for (world, props) in valuation {
            let i = lookup(&world)?;
            for p in props {
                if p.is_empty() {
                    return Err(KripkeError::EmptyAtom);
                }
                atoms[i].insert(p);
            }
        }
        Ok(Self { worlds, index, successors, valuation: atoms })
    }

    /// Index-based constructor used by generators and tests.
    pub fn from_parts(
        worlds: Vec<String>,
        edges: &[(usize, usize)],
        valuation: Vec<BTreeSet<String>>,
    ) -> Result<Self, KripkeError> {
        let n = worlds.len();
        if valuation.len() != n {
            return Err(KripkeError::ValuationCoverage { worlds: n, entries: valuation.len() });
        }
        if let Some(&(i, j)) = edges.iter().find(|(i, j)| *i >= n || *j >= n) {
            return Err(KripkeError::UnknownWorld(format!("#{}", i.max(j))));
        }
        let names = worlds.clone();
        let frame = Self::new(
            worlds,
            edges.iter().map(|&(i, j)| (names[i].clone(), names[j].clone())),
            names.iter().cloned().zip(valuation.into_iter().map(|s| s.into_iter().collect())),
        )?;
        Ok(frame)
    }

    pub fn len(&self) -> usize {
        self.worlds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.worlds.is_empty()
    }

    pub fn worlds(&self) -> &[String] {
        &self.worlds
    }

    pub fn world_name(&self, world: usize) -> &str {
        &self.worlds[world]
    }

    pub fn world_index(&self, name: &str) -> Result<usize, KripkeError> {
        self.index.get(name).copied().ok_or_else(|| KripkeError::UnknownWorld(name.to_string()))
    }

    pub fn successors(&self, world: usize) -> &[usize] {
        &self.successors[world]
    }

    pub fn has_edge(&self, from: usize, to: usize) -> bool {
        self.successors[from].binary_search(&to).is_ok()
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.successors.iter().enumerate().flat_map(|(i, s)| s.iter().map(move |&j| (i, j)))
    }

    pub fn atoms(&self, world: usize) -> &BTreeSet<String> {
        &self.valuation[world]
    }

    #[inline]
    pub fn holds(&self, world: usize, atom: &str) -> bool {
        self.valuation[world].contains(atom)
    }

    /// Every atom named anywhere in the valuation.
    pub fn vocabulary(&self) -> BTreeSet<&str> {
        self.valuation.iter().flatten().map(String::as_str).collect()
    }

    pub fn has_predecessor(&self, world: usize) -> bool {
        self.successors.iter().any(|s| s.binary_search(&world).is_ok())
    }

    /// Worlds reachable from `root` (including `root`), in declaration order.
    pub fn reachable_from(&self, root: usize) -> Vec<usize> {
        let mut seen = vec![false; self.len()];
        let mut queue = VecDeque::from([root]);
        seen[root] = true;
        while let Some(w) = queue.pop_front() {
            for &v in &self.successors[w] {
                if !seen[v] {
                    seen[v] = true;
                    queue.push_back(v);
                }
            }
        }
        (0..self.len()).filter(|&w| seen[w]).collect()
    }

    /// The generated sub-frame rooted at `root`.
    pub fn sub_frame(&self, root: &str) -> Result<Self, KripkeError> {
        let keep = self.reachable_from(self.world_index(root)?);
        let mut remap = vec![usize::MAX; self.len()];
        for (new, &old) in keep.iter().enumerate() {
            remap[old] = new;
        }
        let worlds = keep.iter().map(|&w| self.worlds[w].clone()).collect();
        let edges: Vec<(usize, usize)> = self
            .edges()
            .filter(|&(i, j)| remap[i] != usize::MAX && remap[j] != usize::MAX)
            .map(|(i, j)| (remap[i], remap[j]))
            .collect();
        let valuation = keep.iter().map(|&w| self.valuation[w].clone()).collect();
        Self::from_parts(worlds, &edges, valuation)
    }

    /// Disjoint union; world names are prefixed to keep them distinct.
    pub fn disjoint_union(parts: &[(&str, &KripkeFrame)]) -> Result<Self, KripkeError> {
        let mut worlds = Vec::new();
        let mut edges = Vec::new();
        let mut valuation = Vec::new();
        for (prefix, frame) in parts {
            let offset = worlds.len();
            worlds.extend(frame.worlds.iter().map(|w| format!("{prefix}{w}")));
            edges.extend(frame.edges().map(|(i, j)| (i + offset, j + offset)));
            valuation.extend(frame.valuation.iter().cloned());
        }
        Self::from_parts(worlds, &edges, valuation)
    }

    /// Fails if some world satisfies both atoms.
    pub fn check_exclusive(&self, a: &str, b: &str) -> Result<(), KripkeError> {
        match (0..self.len()).find(|&w| self.holds(w, a) && self.holds(w, b)) {
            Some(w) => Err(KripkeError::ConflictingAtoms {
                world: self.worlds[w].clone(),
                first: a.to_string(),
                second: b.to_string(),
            }),
            None => Ok(()),
        }
    }
}

/// JSON frame document:
///
/// ```json
/// {"worlds": ["A", "B"], "edges": [["A", "B"]], "valuation": {"A": [], "B": ["p"]}}
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrameDocument {
    pub worlds: Vec<String>,
    #[serde(default)]
    pub edges: Vec<(String, String)>,
    #[serde(default)]
    pub valuation: BTreeMap<String, Vec<String>>,
}

impl FrameDocument {
    pub fn build(&self) -> Result<KripkeFrame, KripkeError> {
        KripkeFrame::new(self.worlds.iter().cloned(), self.edges.iter().cloned(), self.valuation.clone())
    }
}

impl From<&KripkeFrame> for FrameDocument {
    fn from(frame: &KripkeFrame) -> Self {
        Self {
            worlds: frame.worlds.clone(),
            edges: frame
                .edges()
                .map(|(i, j)| (frame.worlds[i].clone(), frame.worlds[j].clone()))
                .collect(),
            valuation: frame
                .worlds
                .iter()
                .zip(&frame.valuation)
                .map(|(w, atoms)| (w.clone(), atoms.iter().cloned().collect()))
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(x: &str) -> String {
        x.to_string()
    }

    #[test]
    fn rejects_undeclared_worlds() {
        let err = KripkeFrame::new(["a"], [(s("a"), s("b"))], []).unwrap_err();
        assert_eq!(err, KripkeError::UnknownWorld(s("b")));
        let err = KripkeFrame::new(["a"], [], [(s("z"), vec![s("p")])]).unwrap_err();
        assert_eq!(err, KripkeError::UnknownWorld(s("z")));
        assert_eq!(
            KripkeFrame::new(["a", "a"], [], []).unwrap_err(),
            KripkeError::DuplicateWorld(s("a"))
        );
    }

    #[test]
    fn valuation_covers_every_world() {
        let f = KripkeFrame::new(["a", "b"], [], [(s("b"), vec![s("p")])]).unwrap();
        assert!(f.atoms(0).is_empty());
        assert!(f.holds(1, "p"));
    }

    #[test]
    fn sub_frame_keeps_reachable_part() {
        let f = KripkeFrame::new(
            ["a", "b", "c", "d"],
            [(s("a"), s("b")), (s("b"), s("c")), (s("d"), s("a"))],
            [(s("c"), vec![s("p")])],
        )
        .unwrap();
        let sub = f.sub_frame("b").unwrap();
        assert_eq!(sub.worlds(), &[s("b"), s("c")]);
        assert!(sub.has_edge(0, 1));
        assert!(sub.holds(1, "p"));
    }

    #[test]
    fn union_prefixes_names() {
        let f = KripkeFrame::new(["a"], [(s("a"), s("a"))], []).unwrap();
        let u = KripkeFrame::disjoint_union(&[("x:", &f), ("y:", &f)]).unwrap();
        assert_eq!(u.worlds(), &[s("x:a"), s("y:a")]);
        assert!(u.has_edge(1, 1) && !u.has_edge(0, 1));
    }

    #[test]
    fn document_round_trip() {
        let doc: FrameDocument = serde_json::from_str(
            r#"{"worlds":["A","B"],"edges":[["A","B"]],"valuation":{"B":["p"]}}"#,
        )
        .unwrap();
        let f = doc.build().unwrap();
        assert_eq!(FrameDocument::from(&f).build().unwrap(), f);
        assert!(serde_json::from_str::<FrameDocument>(r#"{"worlds":[],"extra":1}"#).is_err());
    }

    #[test]
    fn exclusive_atoms() {
        let f = KripkeFrame::new(["a"], [], [(s("a"), vec![s("goal"), s("anti_goal")])]).unwrap();
        assert!(f.check_exclusive("goal", "anti_goal").is_err());
    }
}
