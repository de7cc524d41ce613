#ifndef CSG_CLI_RUN_CONFIG_HPP_
#define CSG_CLI_RUN_CONFIG_HPP_

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "csg/learner/train.hpp"

CSG_NAMESPACE_BEGIN
namespace cli {

// Flat "key = value" run configuration. Unset size-dependent fields (view,
// total_steps) are filled in by normalize().
struct RunConfig {
  learner::TrainConfig train;
  int view = 0;          // 0: derived from size
  long total_steps = 0;  // 0: derived from size

  // Resolves derived fields and validates. Throws std::invalid_argument
  // naming the offending key.
  void normalize();
};

// Step budget by grid size: 5M for 5, 30M for 6, 60M for 8, 90M for 10;
// other sizes take the budget of the next listed size up.
long default_budget(int size);

// Every recognized key, in output order.
const std::vector<std::string>& config_keys();

// Applies one key; throws std::invalid_argument naming the key on an unknown
// key or a malformed value.
void set_key(RunConfig& c, std::string_view key, std::string_view value);
std::string get_key(const RunConfig& c, std::string_view key);

// Parses "key = value" lines; '#' starts a comment. Throws
// std::invalid_argument with the line number on a malformed line.
RunConfig parse_config(std::string_view text, RunConfig base = {});
RunConfig load_config(const std::string& path, RunConfig base = {});
// One "key = value" line per key, sorted as config_keys().
std::string to_text(const RunConfig& c);

}  // namespace cli
CSG_NAMESPACE_END

#endif  // CSG_CLI_RUN_CONFIG_HPP_
