#include "litsearch/llm_gateway.hpp"

#include "litsearch/errors.hpp"

#include <nlohmann/json.hpp>

#define CPPHTTPLIB_NO_EXCEPTIONS 0
#include <httplib.h>

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <thread>

using nlohmann::json;

namespace litsearch {

std::int64_t estimate_tokens(const std::string& text) {
    std::int64_t words = 0;
    bool in_word = false;
    for (unsigned char c : text) {
        if (std::isspace(c)) {
            in_word = false;
        } else if (!in_word) {
            in_word = true;
            ++words;
        }
    }
    // rough words-to-tokens factor for English scientific text
    return static_cast<std::int64_t>(static_cast<double>(words) * 1.3 + 0.5);
}

MockProvider::MockProvider(std::vector<MockScriptEntry> script) : script_(std::move(script)) {}

std::shared_ptr<MockProvider> MockProvider::from_script_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw CorpusError("cannot open mock script file: " + path);
    std::vector<MockScriptEntry> script;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            throw ParseError(path + ":" + std::to_string(line_no) + ": " + e.what());
        }
        MockScriptEntry entry;
        const auto& match = j.at("match");
        if (match.is_string()) {
            entry.matchers.push_back(match.get<std::string>());
        } else {
            for (const auto& m : match) entry.matchers.push_back(m.get<std::string>());
        }
        if (entry.matchers.empty()) {
            throw ParseError(path + ":" + std::to_string(line_no) + ": empty matcher list");
        }
        entry.response = j.at("response").get<std::string>();
        script.push_back(std::move(entry));
    }
    return std::make_shared<MockProvider>(std::move(script));
}

Completion MockProvider::complete(const Prompt& prompt) {
    std::string haystack = prompt.system + "\n" + prompt.user;
    const MockScriptEntry* best = nullptr;
    std::size_t best_specificity = 0;
    bool ambiguous = false;
    for (const auto& entry : script_) {
        std::size_t specificity = 0;
        bool all = true;
        for (const auto& m : entry.matchers) {
            if (haystack.find(m) == std::string::npos) {
                all = false;
                break;
            }
            specificity += m.size();
        }
        if (!all) continue;
        if (best == nullptr || specificity > best_specificity) {
            best = &entry;
            best_specificity = specificity;
            ambiguous = false;
        } else if (specificity == best_specificity) {
            ambiguous = true;
        }
    }
    if (best == nullptr) {
        std::string preview = prompt.user.substr(0, 160);
        throw UnmatchedPromptError("no mock script entry matches prompt: " + preview);
    }
    if (ambiguous) {
        throw UnmatchedPromptError("mock script is ambiguous for prompt: " +
                                   prompt.user.substr(0, 160));
    }
    Completion c;
    c.text = best->response;
    c.usage.input_tokens = estimate_tokens(prompt.system) + estimate_tokens(prompt.user);
    c.usage.output_tokens = estimate_tokens(c.text);
    c.provider_id = id();
    return c;
}

HttpProvider::HttpProvider(ProviderConfig cfg, SendFn send)
    : cfg_(std::move(cfg)), send_(std::move(send)) {
    if (send_) return; // injected transport needs no credential
    const char* key = std::getenv(cfg_.credential_env.c_str());
    if (key == nullptr || *key == '\0') {
        throw AuthError("credential environment variable " + cfg_.credential_env + " is not set");
    }
    api_key_ = key;
}

std::string HttpProvider::id() const {
    return cfg_.model.empty() ? std::string("http") : cfg_.model;
}

HttpRequest HttpProvider::build_request(const Prompt& prompt, const ProviderConfig& cfg) {
    json body;
    body["model"] = cfg.model;
    if (!prompt.system.empty()) body["system"] = prompt.system;
    body["messages"] = json::array({json{{"role", "user"}, {"content", prompt.user}}});
    body["max_tokens"] = prompt.max_output_tokens;
    if (prompt.deterministic) body["temperature"] = 0.0;

    HttpRequest req;
    req.path = "/v1/messages";
    req.headers = {{"content-type", "application/json"}};
    req.body = body.dump();
    return req;
}

Completion HttpProvider::parse_response(const HttpResponse& response, const std::string& model) {
    if (response.status == 401 || response.status == 403) {
        throw AuthError("provider rejected credentials (HTTP " +
                        std::to_string(response.status) + ")");
    }
    if (response.status == 408 || response.status == 429 || response.status >= 500) {
        throw TransientError("provider transient failure (HTTP " +
                             std::to_string(response.status) + ")");
    }
    if (response.status != 200) {
        throw ProtocolError("unexpected provider status " + std::to_string(response.status) +
                            ": " + response.body.substr(0, 200));
    }
    json j;
    try {
        j = json::parse(response.body);
    } catch (const json::exception& e) {
        throw ProtocolError(std::string("provider response is not valid JSON: ") + e.what());
    }
    Completion c;
    try {
        for (const auto& block : j.at("content")) {
            if (block.value("type", "text") == "text") {
                c.text += block.at("text").get<std::string>();
            }
        }
    } catch (const json::exception& e) {
        throw ProtocolError(std::string("provider response missing content: ") + e.what());
    }
    if (c.text.empty()) throw ProtocolError("provider response contained no text");
    if (j.contains("usage")) {
        c.usage.input_tokens = j["usage"].value("input_tokens", std::int64_t{0});
        c.usage.output_tokens = j["usage"].value("output_tokens", std::int64_t{0});
    }
    c.provider_id = model;
    return c;
}

Completion HttpProvider::complete(const Prompt& prompt) {
    HttpRequest req = build_request(prompt, cfg_);
    HttpResponse res;
    if (send_) {
        res = send_(req);
    } else {
        httplib::Client client(cfg_.endpoint);
        auto seconds = std::chrono::duration_cast<std::chrono::seconds>(cfg_.request_timeout);
        client.set_read_timeout(seconds.count(), 0);
        client.set_connection_timeout(seconds.count(), 0);
        httplib::Headers headers{{"x-api-key", api_key_}};
        auto result = client.Post(req.path, headers, req.body, "application/json");
        if (!result) {
            throw TransientError("request failed: " + httplib::to_string(result.error()));
        }
        res.status = result->status;
        res.body = result->body;
    }
    Completion c = parse_response(res, id());
    if (c.usage.input_tokens == 0 && c.usage.output_tokens == 0) {
        c.usage.input_tokens = estimate_tokens(prompt.system) + estimate_tokens(prompt.user);
        c.usage.output_tokens = estimate_tokens(c.text);
    }
    return c;
}

Gateway::Gateway(std::shared_ptr<CompletionProvider> provider, ProviderConfig cfg, SleepFn sleep)
    : provider_(std::move(provider)), cfg_(std::move(cfg)), sleep_(std::move(sleep)) {
    if (!sleep_) {
        sleep_ = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
    }
}

Completion Gateway::complete(const Prompt& prompt) {
    {
        std::unique_lock lock(mutex_);
        slot_free_.wait(lock, [&] { return in_flight_ < cfg_.max_concurrent_requests; });
        ++in_flight_;
    }
    struct SlotGuard {
        Gateway& g;
        ~SlotGuard() {
            {
                std::lock_guard lock(g.mutex_);
                --g.in_flight_;
            }
            g.slot_free_.notify_one();
        }
    } guard{*this};

    std::chrono::milliseconds backoff = cfg_.backoff_base;
    int attempt = 0;
    for (;;) {
        try {
            Completion c = provider_->complete(prompt);
            std::lock_guard lock(mutex_);
            ++requests_;
            usage_ += c.usage;
            return c;
        } catch (const TransientError&) {
            {
                std::lock_guard lock(mutex_);
                ++requests_;
            }
            if (attempt >= cfg_.max_retries) throw;
            ++attempt;
            sleep_(backoff);
            backoff *= 2;
        }
    }
}

Usage Gateway::total_usage() const {
    std::lock_guard lock(mutex_);
    return usage_;
}

std::int64_t Gateway::request_count() const {
    std::lock_guard lock(mutex_);
    return requests_;
}

} // namespace litsearch
