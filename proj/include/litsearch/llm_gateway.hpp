#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace litsearch {

struct Prompt {
    std::string system;
    std::string user;
    int max_output_tokens = 2048;
    bool deterministic = true;

    bool operator==(const Prompt&) const = default;
};

struct Usage {
    std::int64_t input_tokens = 0;
    std::int64_t output_tokens = 0;

    Usage& operator+=(const Usage& other) {
        input_tokens += other.input_tokens;
        output_tokens += other.output_tokens;
        return *this;
    }
};

struct Completion {
    std::string text;
    Usage usage;
    std::string provider_id;
};

struct ProviderConfig {
    std::string endpoint;                 // e.g. http://localhost:8080
    std::string model;
    std::string credential_env = "LITSEARCH_API_KEY";
    int max_retries = 3;
    std::chrono::milliseconds backoff_base{1000}; // doubles per retry
    std::chrono::milliseconds request_timeout{120000};
    int max_concurrent_requests = 4;
};

class CompletionProvider {
public:
    virtual ~CompletionProvider() = default;
    virtual Completion complete(const Prompt& prompt) = 0;
    virtual std::string id() const = 0;
};

struct MockScriptEntry {
    std::vector<std::string> matchers; // every substring must appear in the prompt
    std::string response;
};

// Deterministic scripted provider. The most specific matching entry (largest
// total matcher length) answers; an unmatched prompt is an error, never a
// fabricated response. Equally specific competing matches are rejected as
// ambiguous.
class MockProvider : public CompletionProvider {
public:
    explicit MockProvider(std::vector<MockScriptEntry> script);

    // Line-delimited JSON entries: {"match": "substr" | ["a","b"], "response": "..."}
    static std::shared_ptr<MockProvider> from_script_file(const std::string& path);

    Completion complete(const Prompt& prompt) override;
    std::string id() const override { return "mock"; }

private:
    std::vector<MockScriptEntry> script_;
};

struct HttpRequest {
    std::string path;
    std::vector<std::pair<std::string, std::string>> headers;
    std::string body;
};

struct HttpResponse {
    int status = 0;
    std::string body;
};

// Messages-style HTTP completion endpoint. The wire call is injectable so
// tests can drive the provider without a network.
class HttpProvider : public CompletionProvider {
public:
    using SendFn = std::function<HttpResponse(const HttpRequest&)>;

    // Resolves the credential from cfg.credential_env; throws AuthError when
    // the variable is unset and no custom send function is supplied.
    explicit HttpProvider(ProviderConfig cfg, SendFn send = nullptr);

    Completion complete(const Prompt& prompt) override;
    std::string id() const override;

    static HttpRequest build_request(const Prompt& prompt, const ProviderConfig& cfg);
    static Completion parse_response(const HttpResponse& response, const std::string& model);

private:
    ProviderConfig cfg_;
    std::string api_key_;
    SendFn send_;
};

// Whitespace-token count scaled by a provider factor; used whenever a
// provider reports no usage.
std::int64_t estimate_tokens(const std::string& text);

// Wraps a provider with retry on transient failures (exponential backoff),
// an in-flight request ceiling and cumulative usage accounting. Shareable
// across threads.
class Gateway {
public:
    using SleepFn = std::function<void(std::chrono::milliseconds)>;

    Gateway(std::shared_ptr<CompletionProvider> provider, ProviderConfig cfg,
            SleepFn sleep = nullptr);

    Completion complete(const Prompt& prompt);

    Usage total_usage() const;
    std::int64_t request_count() const;

private:
    std::shared_ptr<CompletionProvider> provider_;
    ProviderConfig cfg_;
    SleepFn sleep_;

    mutable std::mutex mutex_;
    std::condition_variable slot_free_;
    int in_flight_ = 0;
    Usage usage_;
    std::int64_t requests_ = 0;
};

} // namespace litsearch
