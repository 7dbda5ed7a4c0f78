package org.bukkit;

public final class Bukkit {
    private static Server server;

    private Bukkit() {
    }

    public static Server getServer() {
        return server;
    }

    public static void setServer(Server server) {
        if (server != null) {
            throw new UnsupportedOperationException("Cannot redefine singleton Server");
        }

        server = server;
        server.getLogger().info("This server is running " + getName() + " version " + getVersion());
    }

    public static String getName() {
        return server.getName();
    }

    public static String getVersion() {
        return server.getVersion();
    }
}
