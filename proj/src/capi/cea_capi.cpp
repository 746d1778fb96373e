#include "cea/cea.h"

#include <cstring>
#include <string>

#include "pipeline/pipeline.hpp"
#include "util/error.hpp"

struct cea_engine {
  cea::pipeline::RunConfig config;
  std::string last_error;
  std::string result_json;
  std::string result_text;
};

namespace {

void fill_errbuf(char* errbuf, size_t errbuf_size, const std::string& msg) {
  if (!errbuf || errbuf_size == 0) return;
  const size_t n = std::min(errbuf_size - 1, msg.size());
  std::memcpy(errbuf, msg.data(), n);
  errbuf[n] = '\0';
}

cea_status status_of(const cea::Error& e) { return static_cast<cea_status>(e.code()); }

template <typename F>
cea_status create_impl(F make_config, cea_engine** out_engine, char* errbuf, size_t errbuf_size) {
  if (!out_engine) return CEA_ERROR_VALIDATION;
  *out_engine = nullptr;
  try {
    auto engine = std::make_unique<cea_engine>();
    engine->config = make_config();
    *out_engine = engine.release();
    return CEA_OK;
  } catch (const cea::Error& e) {
    fill_errbuf(errbuf, errbuf_size, e.what());
    return status_of(e);
  } catch (const std::exception& e) {
    fill_errbuf(errbuf, errbuf_size, e.what());
    return CEA_ERROR_INTERNAL;
  }
}

}  // namespace

extern "C" {

const char* cea_version(void) { return cea::pipeline::kEngineVersion; }

cea_status cea_engine_create(const char* config_path, cea_engine** out_engine, char* errbuf, size_t errbuf_size) {
  if (!config_path) {
    fill_errbuf(errbuf, errbuf_size, "config_path is NULL");
    return CEA_ERROR_VALIDATION;
  }
  return create_impl([&] { return cea::pipeline::RunConfig::load_file(config_path); }, out_engine, errbuf,
                     errbuf_size);
}

cea_status cea_engine_create_from_text(const char* config_json, cea_engine** out_engine, char* errbuf,
                                       size_t errbuf_size) {
  if (!config_json) {
    fill_errbuf(errbuf, errbuf_size, "config_json is NULL");
    return CEA_ERROR_VALIDATION;
  }
  return create_impl([&] { return cea::pipeline::RunConfig::from_json_text(config_json, "<text>"); }, out_engine,
                     errbuf, errbuf_size);
}

void cea_engine_destroy(cea_engine* engine) { delete engine; }

cea_status cea_engine_set_override(cea_engine* engine, const char* key, const char* value) {
  if (!engine) return CEA_ERROR_VALIDATION;
  if (!key || !value) {
    engine->last_error = "override key/value is NULL";
    return CEA_ERROR_VALIDATION;
  }
  try {
    engine->config.apply_override(key, value);
    engine->last_error.clear();
    return CEA_OK;
  } catch (const cea::Error& e) {
    engine->last_error = e.what();
    return status_of(e);
  } catch (const std::exception& e) {
    engine->last_error = e.what();
    return CEA_ERROR_INTERNAL;
  }
}

cea_status cea_engine_run(cea_engine* engine, const char* command) {
  if (!engine) return CEA_ERROR_VALIDATION;
  if (!command) {
    engine->last_error = "command is NULL";
    return CEA_ERROR_VALIDATION;
  }
  try {
    const auto result = cea::pipeline::run_command(engine->config, command);
    engine->result_json = result.summary.dump(2);
    engine->result_text = result.text;
    engine->last_error.clear();
    return CEA_OK;
  } catch (const cea::Error& e) {
    engine->last_error = e.what();
    return status_of(e);
  } catch (const std::exception& e) {
    engine->last_error = e.what();
    return CEA_ERROR_INTERNAL;
  }
}

const char* cea_engine_last_error(const cea_engine* engine) {
  return engine ? engine->last_error.c_str() : "engine is NULL";
}

const char* cea_engine_result_json(const cea_engine* engine) { return engine ? engine->result_json.c_str() : ""; }

const char* cea_engine_result_text(const cea_engine* engine) { return engine ? engine->result_text.c_str() : ""; }

}  // extern "C"
