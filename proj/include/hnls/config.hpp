#pragma once

// Flat key = value configuration with a fixed schema: unknown keys are
// rejected, and every key always carries a value (defaults materialize at
// construction), so a config echo fully pins a run.

#include <map>
#include <string>

namespace hnls {

class Config {
public:
    static Config defaults();
    static Config from_file(const std::string& path);

    void set(const std::string& key, const std::string& value);  // throws on unknown key
    bool has(const std::string& key) const;

    double num(const std::string& key) const;
    long integer(const std::string& key) const;
    bool flag(const std::string& key) const;
    const std::string& str(const std::string& key) const;
    int sign(const std::string& key) const;  // "+"/"-"/"+1"/"-1"

    const std::map<std::string, std::string>& entries() const { return kv_; }

    static const std::map<std::string, std::string>& schema();  // key -> default

private:
    std::map<std::string, std::string> kv_;
};

}  // namespace hnls
