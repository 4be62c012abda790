//! Input ⇒ output rule derivation from a frequent family.

use std::collections::HashMap;

use super::{ratio, FrequentItemSet};
use crate::model::{AttributeKind, ItemSet, Rule, RuleSource, Schema};

/// For every frequent `Z` binding at least one input and one output, emits
/// `inputs(Z) ⇒ outputs(Z)` when `count(Z) / count(inputs(Z))` reaches
/// `min_confidence`.
///
/// `frequent` must be downward closed with exact counts (the output of
/// `apriori` or `expand_maximal`); itemsets whose antecedent is missing from
/// the family are skipped. Itemsets touching attributes outside the schema
/// are ignored. The result is sorted by [`Rule::listing_cmp`].
pub fn derive_rules(
    frequent: &[FrequentItemSet],
    schema: &Schema,
    min_confidence: f64,
    source: RuleSource,
) -> Vec<Rule> {
    let counts: HashMap<&ItemSet, u64> = frequent
        .iter()
        .map(|f| (&f.items, f.support_count))
        .collect();
    let mut rules = Vec::new();
    for z in frequent {
        if z.items.attributes().any(|a| schema.get(a).is_none()) {
            continue;
        }
        let antecedent = z
            .items
            .restrict(|a| schema.kind_of(a) == Some(AttributeKind::Input));
        let consequent = z
            .items
            .restrict(|a| schema.kind_of(a) == Some(AttributeKind::Output));
        if antecedent.is_empty() || consequent.is_empty() {
            continue;
        }
        let Some(&antecedent_count) = counts.get(&antecedent) else {
            continue;
        };
        let confidence = ratio(z.support_count, antecedent_count);
        if confidence >= min_confidence {
            rules.push(Rule {
                antecedent,
                consequent,
                support: z.support,
                confidence,
                source,
            });
        }
    }
    rules.sort_by(Rule::listing_cmp);
    rules
}
