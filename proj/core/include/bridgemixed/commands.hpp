#pragma once

#include <stdexcept>
#include <string>

#include "bridgemixed/run_config.hpp"

namespace bridgemixed {

/// Failure with a machine-readable category: config, io, data, model, run.
class CommandError : public std::runtime_error {
 public:
  CommandError(std::string category, const std::string& message)
      : std::runtime_error(message), category_(std::move(category)) {}
  const std::string& category() const { return category_; }
  int exit_code() const;

 private:
  std::string category_;
};

void cmd_simulate(const RunConfig& config);
void cmd_fit(const RunConfig& config);
void cmd_summarize(const RunConfig& config);
void cmd_compare(const RunConfig& config);
void cmd_ppc(const RunConfig& config);
void cmd_patterns(const RunConfig& config);

/// Route config.command to the implementation above; throws CommandError.
void dispatch(const RunConfig& config);

}  // namespace bridgemixed
