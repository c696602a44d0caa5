#pragma once

#include <chrono>
#include <stdexcept>
#include <string>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "planqa/vqa.hpp"

namespace planqa {

class TransportError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class TimeoutError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class MalformedResponse : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RemoteOptions {
  double timeout_seconds = 30.0;
  /// Degraded answers (timeout, malformed body) count as abstentions and
  /// map to No. An unreachable service is still fatal.
  bool abstain_as_no = true;
};

/// POST <endpoint>/v1/answer with {"question": ..., "image": ...};
/// expects {"answer": "yes"|"no", "confidence": number in [0, 1]} with
/// status 200. The service thresholds its own confidence at 0.5 to pick
/// the answer string; the client maps that string to a verdict.
inline Answer remote_answer(const std::string& question, const std::string& image_ref,
                            const std::string& endpoint, const RemoteOptions& options = {}) {
  std::string base = endpoint;
  while (!base.empty() && base.back() == '/') base.pop_back();

  httplib::Client client(base);
  auto timeout = std::chrono::milliseconds(
      static_cast<long long>(options.timeout_seconds * 1000.0));
  client.set_connection_timeout(timeout);
  client.set_read_timeout(timeout);
  client.set_write_timeout(timeout);

  nlohmann::json body = {{"question", question}, {"image", image_ref}};
  httplib::Result result = client.Post("/v1/answer", body.dump(), "application/json");

  if (!result) {
    if (result.error() == httplib::Error::ConnectionTimeout)
      throw TimeoutError("VQA service timed out after " +
                         std::to_string(options.timeout_seconds) + " s: " + base);
    throw TransportError("VQA transport failure (" + httplib::to_string(result.error()) +
                         ") contacting " + base);
  }
  if (result->status != 200)
    throw TransportError("VQA service returned status " + std::to_string(result->status));

  nlohmann::json payload = nlohmann::json::parse(result->body, nullptr, false);
  if (payload.is_discarded() || !payload.is_object())
    throw MalformedResponse("VQA response is not a JSON object: " + result->body);
  if (!payload.contains("answer") || !payload["answer"].is_string())
    throw MalformedResponse("VQA response lacks a string 'answer' field");
  if (!payload.contains("confidence") || !payload["confidence"].is_number())
    throw MalformedResponse("VQA response lacks a numeric 'confidence' field");
  double confidence = payload["confidence"].get<double>();
  if (!(confidence >= 0.0 && confidence <= 1.0))
    throw MalformedResponse("VQA confidence outside [0, 1]: " + std::to_string(confidence));
  std::string answer = payload["answer"].get<std::string>();
  if (answer != "yes" && answer != "no")
    throw MalformedResponse("VQA answer must be \"yes\" or \"no\", got \"" + answer + "\"");

  return Answer(answer == "yes", true);
}

/// Oracle client backed by a remote VQA service. Timeouts and malformed
/// replies abstain (as No) when configured; transport failures always
/// propagate and abort the trial with a diagnostic.
class RemoteOracle final : public OracleClient {
 public:
  explicit RemoteOracle(std::string endpoint, RemoteOptions options = {})
      : endpoint_(std::move(endpoint)), options_(options) {}

  Answer ask(const Question& question, const Observation& observation,
             SplitMix64& rng) override {
    (void)rng;  // remote answers carry their own nondeterminism
    try {
      return remote_answer(question.text, observation.image_ref_, endpoint_, options_);
    } catch (const TimeoutError&) {
      if (options_.abstain_as_no) return Answer(false, true);
      throw;
    } catch (const MalformedResponse&) {
      if (options_.abstain_as_no) return Answer(false, true);
      throw;
    }
  }

 private:
  std::string endpoint_;
  RemoteOptions options_;
};

}  // namespace planqa
