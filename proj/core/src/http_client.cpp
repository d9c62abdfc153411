// SPDX-License-Identifier: Apache-2.0
#include "http_client.hpp"

#include "tulip/error.hpp"

#include <httplib.h>
#include <spdlog/spdlog.h>

namespace tulip::detail {

namespace {

std::string excerpt(const std::string& body)
{
    constexpr size_t limit = 512;
    return body.size() <= limit ? body : body.substr(0, limit) + "...";
}

} // namespace

JsonHttpClient::JsonHttpClient(std::string base_url, std::string api_key, int timeout_seconds)
    : api_key_(std::move(api_key)), timeout_seconds_(timeout_seconds)
{
    while (!base_url.empty() && base_url.back() == '/')
        base_url.pop_back();
    auto scheme_end = base_url.find("://");
    auto host_start = scheme_end == std::string::npos ? 0 : scheme_end + 3;
    auto path_start = base_url.find('/', host_start);
    if (path_start == std::string::npos) {
        origin_ = base_url;
    } else {
        origin_ = base_url.substr(0, path_start);
        path_prefix_ = base_url.substr(path_start);
    }
    if (origin_.empty())
        throw Error(Errc::ConfigError, "empty base URL for HTTP backend");
}

Json JsonHttpClient::post(const std::string& path, const Json& body) const
{
    httplib::Client client(origin_);
    client.set_connection_timeout(timeout_seconds_, 0);
    client.set_read_timeout(timeout_seconds_, 0);
    client.set_write_timeout(timeout_seconds_, 0);

    httplib::Headers headers;
    if (!api_key_.empty())
        headers.emplace("Authorization", "Bearer " + api_key_);

    const auto url = path_prefix_ + path;
    const auto payload = body.dump();

    httplib::Result result = client.Post(url, headers, payload, "application/json");
    if (!result) {
        spdlog::warn("POST {}{} failed ({}), retrying once", origin_, url,
                     httplib::to_string(result.error()));
        result = client.Post(url, headers, payload, "application/json");
    }
    if (!result)
        throw BackendError(-1, "",
                           "POST " + origin_ + url + " failed: " + httplib::to_string(result.error()));

    if (result->status < 200 || result->status >= 300)
        throw BackendError(result->status, excerpt(result->body), "POST " + url + " returned an error");

    try {
        return Json::parse(result->body);
    } catch (const Json::parse_error&) {
        throw BackendError(result->status, excerpt(result->body), "response body is not valid JSON");
    }
}

} // namespace tulip::detail
