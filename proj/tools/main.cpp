#include "cli.hpp"

#include <iostream>
#include <new>

#include "cdl/error.hpp"

namespace
{

int report(const char* kind, const std::string& message, int code)
{
    cli::json j;
    j["error"] = {{"kind", kind}, {"message", message}};
    j["exit_code"] = code;
    std::cerr << j.dump() << '\n';
    return code;
}

int exit_code_of(const cdl::Error& e)
{
    const std::string kind = e.kind();
    if (kind == "parse" || kind == "validation")
        return cli::exit_data;
    return cli::exit_numeric; // domain, numeric, infeasible
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Description lengths of community-detection quality functions", "cdl"};
    app.set_version_flag("--version", cli::tool_version);
    app.require_subcommand(1);
    cli::register_analysis(app);
    cli::register_sample(app);
    cli::register_optimize(app);
    cli::register_validate(app);

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::CallForHelp& e)
    {
        return app.exit(e);
    }
    catch (const CLI::CallForAllHelp& e)
    {
        return app.exit(e);
    }
    catch (const CLI::CallForVersion& e)
    {
        return app.exit(e);
    }
    catch (const CLI::ParseError& e)
    {
        return report("usage", e.what(), cli::exit_usage);
    }
    catch (const cli::UsageError& e)
    {
        return report("usage", e.what(), cli::exit_usage);
    }
    catch (const cdl::Error& e)
    {
        return report(e.kind(), e.what(), exit_code_of(e));
    }
    catch (const std::bad_alloc&)
    {
        return report("numeric", "out of memory", cli::exit_numeric);
    }
    catch (const std::exception& e)
    {
        return report("error", e.what(), cli::exit_data);
    }
    return cli::command_exit_code;
}
