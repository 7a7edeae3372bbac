#ifndef CERTLOOP_MODEL_IO_HPP
#define CERTLOOP_MODEL_IO_HPP

#include <string>
#include <string_view>

#include "certloop/kv.hpp"
#include "certloop/markov.hpp"

namespace certloop {

/// Model and template files share one layout:
///
///   model {                      # or model-template
///     kind ctmc                  # ctmc | dtmc
///     initial sense
///     states {
///       s sense
///       s done end done          # s <name> <label>...
///     }
///     transitions {
///       t sense done 0.9         # t <from> <to> <weight>
///       t sense fail "1 - p"     # quoted expressions in templates
///     }
///     rewards energy {
///       state sense "e"          # state <name> <value>
///       trans sense done 3       # trans <from> <to> <value>
///     }
///     parameters {
///       p r "1/s" 1e-6 10000     # p <name> <unit> <min> <max>
///     }
///   }
KvNode template_to_kv(const ModelTemplate& tmpl);
ModelTemplate template_from_kv(const KvNode& node);

KvNode model_to_kv(const MarkovModel& model);
MarkovModel model_from_kv(const KvNode& node);

std::string serialize_template(const ModelTemplate& tmpl);
ModelTemplate parse_template(std::string_view text);

std::string serialize_model(const MarkovModel& model);
MarkovModel parse_model(std::string_view text);

ModelTemplate load_template(const std::string& path);
MarkovModel load_model(const std::string& path);

}  // namespace certloop

#endif
