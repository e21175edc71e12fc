//! The Cluster Fusion Hierarchy: a forest over all samples recording which
//! medoid absorbed each sample and at which iteration.
//!
//! Unlike a dendrogram there are no heights or linkage distances; edges carry
//! only the iteration number of the fusion.

use serde::{Deserialize, Serialize};

use super::{FusionEvent, ModelError, ParentMap, SampleId};

/// One node per sample. Roots point to themselves and carry no iteration.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CfhNode {
    pub id: SampleId,
    pub parent: SampleId,
    pub iteration: Option<u32>,
}

/// The full fusion forest. Leaves are the `n` samples; roots are the final
/// active medoids.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CfhTree {
    pub nodes: Vec<CfhNode>,
    pub roots: Vec<SampleId>,
}

impl CfhTree {
    /// Builds the hierarchy from the parent map and the fusion log recorded
    /// during the run. The log must agree with the map exactly: same fused
    /// children, same parents, no duplicates.
    pub fn build(parents: &ParentMap, fusion_log: &[FusionEvent]) -> Result<Self, ModelError> {
        let n = parents.len();
        let mut iteration: Vec<Option<u32>> = vec![None; n];
        for ev in fusion_log {
            if ev.child.index() >= n
                || parents.get(ev.child) != ev.parent
                || iteration[ev.child.index()].is_some()
            {
                return Err(ModelError::InconsistentFusionLog { child: ev.child });
            }
            iteration[ev.child.index()] = Some(ev.iteration);
        }
        let mut nodes = Vec::with_capacity(n);
        for raw in 0..n as u32 {
            let id = SampleId(raw);
            let parent = parents.get(id);
            let fused = parent != id;
            if fused != iteration[id.index()].is_some() {
                return Err(ModelError::InconsistentFusionLog { child: id });
            }
            // Guards against cycles in a hand-built map.
            parents.root_of(id)?;
            nodes.push(CfhNode {
                id,
                parent,
                iteration: iteration[id.index()],
            });
        }
        let roots = parents.roots();
        let tree = CfhTree { nodes, roots };
        tree.validate()?;
        Ok(tree)
    }

    /// Checks the structural invariants: the graph is a forest over all
    /// samples, roots are exactly the self-pointers, and fusion iterations
    /// strictly increase from any node towards its root.
    pub fn validate(&self) -> Result<(), ModelError> {
        for node in &self.nodes {
            if node.parent == node.id {
                if !self.roots.contains(&node.id) {
                    return Err(ModelError::DanglingRoot {
                        id: node.id,
                        root: node.id,
                    });
                }
                continue;
            }
            let mut cur = node;
            let mut hops = 0usize;
            while cur.parent != cur.id {
                let up = &self.nodes[cur.parent.index()];
                if let (Some(child_it), Some(parent_it)) = (cur.iteration, up.iteration) {
                    if parent_it <= child_it {
                        return Err(ModelError::InconsistentFusionLog { child: cur.id });
                    }
                }
                cur = up;
                hops += 1;
                if hops > self.nodes.len() {
                    return Err(ModelError::ParentCycle { id: node.id });
                }
            }
        }
        Ok(())
    }

    /// Labels every sample by the dense index of its root, grouping leaves
    /// by subtree. Mirrors `ParentMap::final_labels` on a consistent pair.
    pub fn root_partition(&self) -> Result<Vec<u32>, ModelError> {
        let mut labels = Vec::with_capacity(self.nodes.len());
        for node in &self.nodes {
            let mut cur = node.id;
            let mut hops = 0usize;
            while self.nodes[cur.index()].parent != cur {
                cur = self.nodes[cur.index()].parent;
                hops += 1;
                if hops > self.nodes.len() {
                    return Err(ModelError::ParentCycle { id: node.id });
                }
            }
            let root = self
                .roots
                .binary_search(&cur)
                .map_err(|_| ModelError::DanglingRoot {
                    id: node.id,
                    root: cur,
                })?;
            labels.push(root as u32);
        }
        Ok(labels)
    }

    /// Serializes as `{ "nodes": [{id, parent, iteration}], "roots": [..] }`.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serialization of plain structs cannot fail")
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    /// Renders one Newick string per root, newline separated. Fusion
    /// iteration numbers appear as branch annotations: `(1:1,3:2)0;` means
    /// samples 1 and 3 were fused into medoid 0 at iterations 1 and 2.
    pub fn to_newick(&self) -> String {
        let mut children: Vec<Vec<SampleId>> = vec![Vec::new(); self.nodes.len()];
        for node in &self.nodes {
            if node.parent != node.id {
                children[node.parent.index()].push(node.id);
            }
        }
        let mut out = String::new();
        for (i, &root) in self.roots.iter().enumerate() {
            if i > 0 {
                out.push('\n');
            }
            self.write_newick(root, &children, &mut out);
            out.push(';');
        }
        out
    }

    fn write_newick(&self, id: SampleId, children: &[Vec<SampleId>], out: &mut String) {
        let kids = &children[id.index()];
        if !kids.is_empty() {
            out.push('(');
            for (i, &kid) in kids.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                self.write_newick(kid, children, out);
                if let Some(it) = self.nodes[kid.index()].iteration {
                    out.push(':');
                    out.push_str(&it.to_string());
                }
            }
            out.push(')');
        }
        out.push_str(&id.to_string());
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ActiveSet;

    fn ids(raw: &[u32]) -> Vec<SampleId> {
        raw.iter().copied().map(SampleId).collect()
    }

    #[test]
    fn empty_log_yields_singleton_forest() {
        let p = ParentMap::identity(5);
        let tree = CfhTree::build(&p, &[]).unwrap();
        assert_eq!(tree.roots.len(), 5);
        assert!(tree.nodes.iter().all(|n| n.iteration.is_none()));
        assert_eq!(tree.to_newick(), "0;\n1;\n2;\n3;\n4;");
    }

    #[test]
    fn two_fusions_give_a_two_level_tree() {
        let mut p = ParentMap::identity(4);
        let k_prev = ActiveSet::initial(4);
        let k_new = ActiveSet::new(ids(&[0, 2]), 1).unwrap();
        let log = p.update_parents(&[0, 0, 1, 1], &k_prev, &k_new, 1).unwrap();
        let tree = CfhTree::build(&p, &log).unwrap();
        assert_eq!(tree.roots, ids(&[0, 2]));
        assert_eq!(tree.nodes[1].iteration, Some(1));
        assert_eq!(tree.nodes[3].iteration, Some(1));
        assert_eq!(tree.to_newick(), "(1:1)0;\n(3:1)2;");
    }

    #[test]
    fn build_rejects_log_that_disagrees_with_the_map() {
        let mut p = ParentMap::identity(4);
        let k_prev = ActiveSet::initial(4);
        let k_new = ActiveSet::new(ids(&[0, 2]), 1).unwrap();
        let mut log = p.update_parents(&[0, 0, 1, 1], &k_prev, &k_new, 1).unwrap();
        log[0].parent = SampleId(2);
        assert!(matches!(
            CfhTree::build(&p, &log).unwrap_err(),
            ModelError::InconsistentFusionLog { .. }
        ));
        // A missing event is just as inconsistent.
        let short = vec![log[1]];
        assert!(CfhTree::build(&p, &short).is_err());
    }

    #[test]
    fn root_partition_matches_final_labels() {
        let mut p = ParentMap::identity(6);
        let mut log = Vec::new();
        let k0 = ActiveSet::initial(6);
        let k1 = ActiveSet::new(ids(&[0, 3]), 1).unwrap();
        log.extend(
            p.update_parents(&[0, 0, 0, 1, 1, 1], &k0, &k1, 1)
                .unwrap(),
        );
        let k2 = ActiveSet::new(ids(&[0]), 2).unwrap();
        log.extend(p.update_parents(&[0, 0], &k1, &k2, 2).unwrap());
        let tree = CfhTree::build(&p, &log).unwrap();
        assert_eq!(tree.root_partition().unwrap(), p.final_labels(&k2).unwrap());
    }

    #[test]
    fn json_round_trip_preserves_the_tree() {
        let mut p = ParentMap::identity(4);
        let k_prev = ActiveSet::initial(4);
        let k_new = ActiveSet::new(ids(&[1]), 1).unwrap();
        let log = p.update_parents(&[0, 0, 0, 0], &k_prev, &k_new, 1).unwrap();
        let tree = CfhTree::build(&p, &log).unwrap();
        let back = CfhTree::from_json(&tree.to_json()).unwrap();
        assert_eq!(tree, back);
    }

    #[test]
    fn nested_fusions_render_nested_newick() {
        let mut p = ParentMap::identity(4);
        let mut log = Vec::new();
        let k0 = ActiveSet::initial(4);
        let k1 = ActiveSet::new(ids(&[0, 2]), 1).unwrap();
        log.extend(p.update_parents(&[0, 0, 1, 1], &k0, &k1, 1).unwrap());
        let k2 = ActiveSet::new(ids(&[0]), 2).unwrap();
        log.extend(p.update_parents(&[0, 0], &k1, &k2, 2).unwrap());
        let tree = CfhTree::build(&p, &log).unwrap();
        assert_eq!(tree.to_newick(), "(1:1,(3:1)2:2)0;");
    }
}
