#include "qfubqc.h"

#include <cstdlib>
#include <cstring>
#include <string>

#include "qfu/common.hpp"
#include "qfu/runner.hpp"

struct qfu_ctx {
  std::string last_error;
  int last_code = QFU_OK;
};

extern "C" {

qfu_ctx* qfu_ctx_new(void) { return new (std::nothrow) qfu_ctx; }

void qfu_ctx_free(qfu_ctx* ctx) { delete ctx; }

char* qfu_run(qfu_ctx* ctx, const char* request_json) {
  if (!ctx) return nullptr;
  if (!request_json) {
    ctx->last_error = "request_json is null";
    ctx->last_code = QFU_ERR_ARGUMENT;
    return nullptr;
  }
  try {
    const std::string report = qfu::run_request(request_json);
    char* out = static_cast<char*>(std::malloc(report.size() + 1));
    if (!out) {
      ctx->last_error = "out of memory";
      ctx->last_code = QFU_ERR_RUNTIME;
      return nullptr;
    }
    std::memcpy(out, report.c_str(), report.size() + 1);
    ctx->last_error.clear();
    ctx->last_code = QFU_OK;
    return out;
  } catch (const qfu::Error& e) {
    ctx->last_error = std::string(qfu::err_name(e.code())) + ": " + e.what();
    ctx->last_code = e.code() == qfu::Err::Usage ? QFU_ERR_USAGE : QFU_ERR_RUNTIME;
  } catch (const std::exception& e) {
    ctx->last_error = e.what();
    ctx->last_code = QFU_ERR_RUNTIME;
  }
  return nullptr;
}

const char* qfu_last_error(const qfu_ctx* ctx) { return ctx ? ctx->last_error.c_str() : ""; }

int qfu_last_error_code(const qfu_ctx* ctx) { return ctx ? ctx->last_code : QFU_ERR_ARGUMENT; }

void qfu_string_free(char* s) { std::free(s); }

const char* qfu_version(void) { return "1.0.0"; }

}  // extern "C"
