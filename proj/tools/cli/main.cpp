#include <iostream>

#include "ccmap/error.hpp"
#include "common.hpp"

namespace {

using ccmap::cli::J;

int fail(int code, const char* kind, const std::exception& e, const J& state = J()) {
  J j;
  j["error"] = kind;
  j["message"] = e.what();
  j["exit_code"] = code;
  if (!state.is_null()) j["state"] = state;
  std::cerr << j.dump() << "\n";
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Correlation/complexity indicators and IQP circuit training for bitstring datasets.\n"
               "Environment: CCMAP_CACHE_DIR overrides the cache directory."};
  app.set_version_flag("--version", ccmap::cli::tool_version());
  app.require_subcommand(1);
  app.option_defaults()->always_capture_default();

  ccmap::cli::Handlers handlers;
  ccmap::cli::register_data_commands(app, handlers);
  ccmap::cli::register_model_commands(app, handlers);
  ccmap::cli::register_study_commands(app, handlers);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail(2, "config", e);
  }

  try {
    for (const auto* sub : app.get_subcommands()) handlers.at(sub->get_name())();
  } catch (const ccmap::ConfigError& e) {
    return fail(2, "config", e);
  } catch (const ccmap::NumericError& e) {
    J state = J::parse(e.state_json(), nullptr, false);
    if (state.is_discarded()) state = e.state_json();
    return fail(4, "numeric", e, state);
  } catch (const ccmap::DataError& e) {
    return fail(3, "data", e);
  } catch (const nlohmann::json::exception& e) {
    return fail(2, "config", e);
  } catch (const std::filesystem::filesystem_error& e) {
    return fail(3, "data", e);
  } catch (const std::exception& e) {
    return fail(4, "internal", e);
  }
  return 0;
}
