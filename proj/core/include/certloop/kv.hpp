#ifndef CERTLOOP_KV_HPP
#define CERTLOOP_KV_HPP

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace certloop {

/// Node of the nested key-value text format used for all artifact files
/// (models, templates, automata networks, registries, scenarios).
///
/// The format is line based.  An entry is `name value value...`; a block is
/// `name value... {` followed by nested entries/blocks and a closing `}` on
/// its own line.  Values containing whitespace or punctuation are written in
/// double quotes; `#` starts a comment.  Serialization is canonical (2-space
/// indentation, shortest round-trip numbers), so parse -> serialize -> parse
/// is the identity on the tree.
struct KvNode {
  std::string name;
  std::vector<std::string> args;
  std::vector<KvNode> children;
  bool is_block = false;

  const KvNode* find(std::string_view child_name) const;
  const KvNode& at(std::string_view child_name) const;  // throws Error when absent
  std::vector<const KvNode*> all(std::string_view child_name) const;

  const std::string& arg(std::size_t i) const;  // throws Error when absent
  double num(std::size_t i) const;
  std::optional<std::string> opt_arg(std::size_t i) const;

  /// First arg of child `name`, if the child exists.
  std::optional<std::string> value_of(std::string_view child_name) const;
  double num_of(std::string_view child_name) const;
  double num_of(std::string_view child_name, double fallback) const;

  KvNode& add(std::string_view child_name);
  KvNode& add(std::string_view child_name, std::string_view v);
  KvNode& add(std::string_view child_name, double v);
  KvNode& add_block(std::string_view child_name);
};

/// Parses a document; the returned node is an unnamed root block whose
/// children are the top-level items.
KvNode kv_parse(std::string_view text);

std::string kv_serialize(const KvNode& root);

KvNode kv_load(const std::string& path);
void kv_store(const std::string& path, const KvNode& root);

}  // namespace certloop

#endif
